//! A small class-based object calculus with nominal subtyping, call-by-name
//! reduction, a predicate logic over observable object behaviour, and
//! approximation semantics.

pub mod approx;
pub mod context;
pub mod eval;
pub mod parser;
pub mod predicates;
pub mod pretty;
pub mod program;
pub mod syntax;
pub mod typecheck;

pub use context::ExecutionContext;
pub use parser::{parse_approx_expression, parse_expression, parse_predicate, parse_program};
pub use syntax::{Entry, Expr, Member, Name, Predicate, Program};
