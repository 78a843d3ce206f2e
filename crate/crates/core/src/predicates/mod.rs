//! Behavioural predicates: the subpredicate preorder, predicate languages,
//! derivations and bounded proof search.

mod derivation;
mod relation;
mod search;
mod universe;

use std::rc::Rc;

use thiserror::Error;

pub use derivation::{method_env, replay, Derivation, ReplayError, Rule};
pub use relation::{check_env, in_language, join, join_all, subpredicate, EnvViolation, PredEnv, Statement};
pub use search::{validate_query, Prover};
pub use universe::{candidate_universe, Bounds, Languages, DEFAULT_UNIVERSE_CAP};

use crate::context::{ExecutionContext, LookupError};
use crate::syntax::{Expr, Name, Predicate};

pub const DEFAULT_DEPTH: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PredicateError {
    #[error("ill-formed query: {0}")]
    IllFormedQuery(String),
    #[error("the predicate universe for {class} at depth {depth} exceeds {cap} predicates")]
    UniverseTooLarge { class: Name, depth: usize, cap: usize },
    #[error(transparent)]
    Lookup(#[from] LookupError),
}

#[derive(Debug, Clone)]
pub enum Verdict {
    Proven(Rc<Derivation>),
    /// No derivation exists within the bounds. This is not a refutation.
    NotProvenWithinBound,
}

impl Verdict {
    pub fn derivation(&self) -> Option<&Rc<Derivation>> {
        match self {
            Verdict::Proven(d) => Some(d),
            Verdict::NotProvenWithinBound => None,
        }
    }

    pub fn is_proven(&self) -> bool {
        matches!(self, Verdict::Proven(_))
    }
}

/// Searches for a derivation of `env ⊢ e : c : p` with every node drawn from
/// the universe of the given depth. The universe width grows to fit `p`.
pub fn check_predicate(
    ec: &ExecutionContext,
    env: &PredEnv,
    e: &Expr,
    c: &str,
    p: &Predicate,
    depth: usize,
) -> Result<Verdict, PredicateError> {
    check_predicate_within(ec, env, e, c, p, Bounds::new(depth).with_width(p.width()))
}

pub fn check_predicate_within(
    ec: &ExecutionContext,
    env: &PredEnv,
    e: &Expr,
    c: &str,
    p: &Predicate,
    bounds: Bounds,
) -> Result<Verdict, PredicateError> {
    validate_query(ec, env, e, c, p)?;
    let bounds = bounds.with_width(bounds.width.max(p.width()));
    Ok(match Prover::new(ec, bounds).prove(env, e, c, p)? {
        Some(d) => Verdict::Proven(d),
        None => Verdict::NotProvenWithinBound,
    })
}

/// Every predicate of the universe of `c` that can be derived, with a derivation.
pub fn infer_with_derivations(
    ec: &ExecutionContext,
    env: &PredEnv,
    e: &Expr,
    c: &str,
    bounds: Bounds,
) -> Result<Vec<(Predicate, Rc<Derivation>)>, PredicateError> {
    validate_query(ec, env, e, c, &Predicate::Top)?;
    let mut prover = Prover::new(ec, bounds);
    let universe = prover.languages().universe(c, bounds)?;
    let mut out = Vec::new();
    for p in universe {
        if let Some(d) = prover.prove(env, e, c, &p)? {
            out.push((p, d));
        }
    }
    Ok(out)
}

pub fn infer_predicates(
    ec: &ExecutionContext,
    env: &PredEnv,
    e: &Expr,
    c: &str,
    depth: usize,
) -> Result<Vec<Predicate>, PredicateError> {
    Ok(infer_with_derivations(ec, env, e, c, Bounds::new(depth))?.into_iter().map(|(p, _)| p).collect())
}
