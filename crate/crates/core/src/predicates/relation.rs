//! The subpredicate preorder, join, predicate languages and predicate
//! environments.

use std::fmt;

use crate::context::{ExecutionContext, LookupError};
use crate::syntax::{Member, Name, Predicate};
use crate::typecheck::TypeEnv;

/// Decides `p ⊴ q`. Member predicates are compared syntactically.
pub fn subpredicate(p: &Predicate, q: &Predicate) -> bool {
    match (p, q) {
        (_, Predicate::Top) => true,
        _ if p == q => true,
        (Predicate::Object(ps), Predicate::Object(qs)) => qs.iter().all(|e| ps.contains(e)),
        _ => false,
    }
}

/// Concatenation of entries. Non-object arguments contribute nothing.
pub fn join(p: &Predicate, q: &Predicate) -> Predicate {
    Predicate::Object(p.entries().iter().chain(q.entries()).cloned().collect())
}

pub fn join_all<'a>(ps: impl IntoIterator<Item = &'a Predicate>) -> Predicate {
    Predicate::Object(ps.into_iter().flat_map(|p| p.entries().iter().cloned()).collect())
}

/// Decides `p ∈ L(C)`.
pub fn in_language(ec: &ExecutionContext, c: &str, p: &Predicate) -> Result<bool, LookupError> {
    if !ec.is_valid(c) {
        return Err(LookupError::UnknownClass(Name::from(c)));
    }
    Ok(member_of(ec, c, p))
}

fn member_of(ec: &ExecutionContext, c: &str, p: &Predicate) -> bool {
    p.entries().iter().all(|entry| match &entry.member {
        Member::Value(sigma) => match ec.field_type(c, &entry.label) {
            Ok(d) => sigma.is_normal() && member_of(ec, &d, sigma),
            Err(_) => false,
        },
        Member::Method { this, args, result } => match ec.method_type(c, &entry.label) {
            Ok(sig) => {
                sig.params.len() == args.len()
                    && result.is_normal()
                    && member_of(ec, c, this)
                    && sig.params.iter().zip(args).all(|(ci, psi)| member_of(ec, ci, psi))
                    && member_of(ec, &sig.ret, result)
            }
            Err(_) => false,
        },
    })
}

/// A statement `x : C : φ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Statement {
    pub var: Name,
    pub class: Name,
    pub pred: Predicate,
}

/// A predicate environment, kept in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredEnv {
    stmts: Vec<Statement>,
}

impl PredEnv {
    pub fn new() -> PredEnv {
        PredEnv::default()
    }

    pub fn with(mut self, var: &str, class: &str, pred: Predicate) -> PredEnv {
        self.push(Statement { var: Name::from(var), class: Name::from(class), pred });
        self
    }

    pub fn push(&mut self, stmt: Statement) {
        self.stmts.push(stmt);
    }

    pub fn get(&self, var: &str) -> Option<&Statement> {
        self.stmts.iter().find(|s| &*s.var == var)
    }

    pub fn statements(&self) -> &[Statement] {
        &self.stmts
    }

    pub fn is_empty(&self) -> bool {
        self.stmts.is_empty()
    }

    /// The type environment obtained by discarding predicates.
    pub fn erase(&self) -> TypeEnv {
        let mut env = TypeEnv::new();
        for s in &self.stmts {
            env.entry(s.var.clone()).or_insert_with(|| s.class.clone());
        }
        env
    }
}

impl fmt::Display for PredEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, s) in self.stmts.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}: {}: {}", s.var, s.class, s.pred)?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvViolation {
    pub var: Name,
    pub message: String,
}

impl fmt::Display for EnvViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.var, self.message)
    }
}

/// Each variable is bound once, to a valid class and a predicate in its language.
pub fn check_env(ec: &ExecutionContext, env: &PredEnv) -> Result<(), Vec<EnvViolation>> {
    let mut out = Vec::new();
    for (i, s) in env.stmts.iter().enumerate() {
        let mut push = |message: String| out.push(EnvViolation { var: s.var.clone(), message });
        if env.stmts[..i].iter().any(|t| t.var == s.var) {
            push("bound more than once".into());
        }
        if !ec.is_valid(&s.class) {
            push(format!("unknown class {}", s.class));
        } else if !member_of(ec, &s.class, &s.pred) {
            push(format!("{} is not in the language of {}", s.pred, s.class));
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}
