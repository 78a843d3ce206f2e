//! Approximate expressions: the direct approximation order, truncation,
//! bounded approximant sets and the approximation and termination harnesses.

use std::collections::BTreeSet;
use std::rc::Rc;

use rayon::prelude::*;
use thiserror::Error;

use crate::context::ExecutionContext;
use crate::eval::{enumerate_reducts_with, is_approx_normal, reduce_to_head_normal, Reducts};
use crate::predicates::{infer_with_derivations, Bounds, Derivation, PredEnv, PredicateError, Prover, Verdict};
use crate::syntax::{Expr, Predicate};

/// Decides `a ⊑ b`.
pub fn direct_approx(a: &Expr, b: &Expr) -> bool {
    match (a, b) {
        (Expr::Omega, _) => true,
        (Expr::Var(x), Expr::Var(y)) => x == y,
        (Expr::Null, Expr::Null) => true,
        (Expr::Field(r, f), Expr::Field(s, g)) => f == g && direct_approx(r, s),
        (Expr::Assign(r, f, v), Expr::Assign(s, g, w)) => f == g && direct_approx(r, s) && direct_approx(v, w),
        (Expr::Invoke(r, m, xs), Expr::Invoke(s, n, ys)) => {
            m == n && xs.len() == ys.len() && direct_approx(r, s) && pairwise(xs, ys)
        }
        (Expr::New(c, xs), Expr::New(d, ys)) => c == d && xs.len() == ys.len() && pairwise(xs, ys),
        _ => false,
    }
}

fn pairwise(xs: &[Expr], ys: &[Expr]) -> bool {
    xs.iter().zip(ys).all(|(x, y)| direct_approx(x, y))
}

/// The greatest approximate normal form below `a`.
pub fn truncate(a: &Expr) -> Expr {
    let collapse = |r: &Expr| matches!(r, Expr::Omega | Expr::New(..));
    match a {
        Expr::Var(_) | Expr::Null | Expr::Omega => a.clone(),
        Expr::New(c, args) => Expr::New(c.clone(), args.iter().map(truncate).collect()),
        Expr::Field(r, f) => {
            let r = truncate(r);
            if collapse(&r) {
                Expr::Omega
            } else {
                Expr::Field(Box::new(r), f.clone())
            }
        }
        Expr::Assign(r, f, v) => {
            let r = truncate(r);
            if collapse(&r) {
                Expr::Omega
            } else {
                Expr::Assign(Box::new(r), f.clone(), Box::new(truncate(v)))
            }
        }
        Expr::Invoke(r, m, args) => {
            let r = truncate(r);
            if collapse(&r) {
                Expr::Omega
            } else {
                Expr::Invoke(Box::new(r), m.clone(), args.iter().map(truncate).collect())
            }
        }
    }
}

/// A bounded under-approximation of the approximants of an expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApproximantSet {
    pub expressions: BTreeSet<Expr>,
    pub step_budget: usize,
    /// True when every reduct was reached within the budget.
    pub complete: bool,
}

impl ApproximantSet {
    pub fn contains(&self, a: &Expr) -> bool {
        self.expressions.contains(a)
    }
}

pub fn approximants(ec: &ExecutionContext, e: &Expr, step_budget: usize) -> ApproximantSet {
    approximants_with(ec, e, step_budget, false)
}

/// As [`approximants`]; `parallel` spreads reduct enumeration and
/// truncation over the rayon pool without changing the result.
pub fn approximants_with(ec: &ExecutionContext, e: &Expr, step_budget: usize, parallel: bool) -> ApproximantSet {
    let reducts = enumerate_reducts_with(ec, e, step_budget, parallel);
    from_reducts(&reducts, step_budget, parallel)
}

fn from_reducts(reducts: &Reducts, step_budget: usize, parallel: bool) -> ApproximantSet {
    let mut expressions: BTreeSet<Expr> = if parallel {
        reducts.items.par_iter().map(|(r, _)| truncate(r)).collect::<Vec<_>>().into_iter().collect()
    } else {
        reducts.exprs().map(truncate).collect()
    };
    expressions.insert(Expr::Omega);
    ApproximantSet { expressions, step_budget, complete: reducts.complete }
}

/// Checks that `a` approximates some reduct of `e` within the budget and is
/// an approximate normal form.
pub fn certify_approximant(ec: &ExecutionContext, e: &Expr, a: &Expr, step_budget: usize) -> bool {
    is_approx_normal(a) && enumerate_reducts_with(ec, e, step_budget, false).exprs().any(|r| direct_approx(a, r))
}

/// A reduct whose approximants are not all approximants of the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreservationFailure {
    pub reduct: Expr,
    pub distance: usize,
    pub missing: Expr,
}

/// For every reduct `e'` at distance `k`, checks that the approximants of
/// `e'` within `budget` are approximants of `e` within `budget + k`.
pub fn check_approx_preservation(ec: &ExecutionContext, e: &Expr, budget: usize) -> Result<(), PreservationFailure> {
    let source = approximants(ec, e, 2 * budget);
    for (r, k) in enumerate_reducts_with(ec, e, budget, false).items {
        let wide = if k == budget { source.clone() } else { approximants(ec, e, budget + k) };
        for a in approximants(ec, &r, budget).expressions {
            if !wide.contains(&a) {
                return Err(PreservationFailure { reduct: r, distance: k, missing: a });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApproxError {
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error(transparent)]
    Predicate(#[from] PredicateError),
}

#[derive(Debug, Clone)]
pub enum TheoremOutcome {
    Confirmed {
        witness: Expr,
        derivation: Rc<Derivation>,
    },
    /// The budgets were too small to exhibit a witness.
    Unresolved,
}

/// Searches the approximants of `e` for one that can be assigned `p`,
/// given that `e` itself can.
pub fn check_approximation_theorem(
    ec: &ExecutionContext,
    env: &PredEnv,
    e: &Expr,
    c: &str,
    p: &Predicate,
    search_depth: usize,
    step_budget: usize,
) -> Result<TheoremOutcome, ApproxError> {
    let bounds = Bounds::new(search_depth).with_width(p.width());
    let original = crate::predicates::check_predicate_within(ec, env, e, c, p, bounds)?;
    if let Verdict::NotProvenWithinBound = original {
        return Err(ApproxError::PreconditionFailed(format!("{e} is not proven to satisfy {p}")));
    }
    let mut prover = Prover::new(ec, bounds);
    // Larger approximants first: they are the likeliest witnesses.
    let mut candidates: Vec<Expr> = approximants(ec, e, step_budget).expressions.into_iter().collect();
    candidates.sort_by_key(|a| std::cmp::Reverse(a.size()));
    for a in candidates {
        if crate::typecheck::check_type(ec, &env.erase(), &a, c) != Ok(true) {
            continue;
        }
        if let Some(d) = prover.prove(env, &a, c, p)? {
            return Ok(TheoremOutcome::Confirmed { witness: a, derivation: d });
        }
    }
    Ok(TheoremOutcome::Unresolved)
}

#[derive(Debug, Clone)]
pub struct TerminationEvidence {
    pub predicate: Predicate,
    pub derivation: Rc<Derivation>,
    /// The head normal form reached and the number of steps, when the
    /// step budget sufficed.
    pub head_normal: Option<(Expr, usize)>,
}

#[derive(Debug, Clone)]
pub enum TerminationVerdict {
    WillHeadNormalize(TerminationEvidence),
    /// No normal predicate was found. This does not show divergence.
    NoEvidence,
}

pub fn analyze_termination(
    ec: &ExecutionContext,
    env: &PredEnv,
    e: &Expr,
    c: &str,
    search_depth: usize,
    step_budget: usize,
) -> Result<TerminationVerdict, PredicateError> {
    let bounds = Bounds::new(search_depth);
    crate::predicates::validate_query(ec, env, e, c, &Predicate::Top)?;
    let mut prover = Prover::new(ec, bounds);
    let universe = prover.languages().universe(c, bounds)?;
    for p in universe.into_iter().filter(Predicate::is_normal) {
        if let Some(derivation) = prover.prove(env, e, c, &p)? {
            let head_normal = reduce_to_head_normal(ec, e, step_budget);
            return Ok(TerminationVerdict::WillHeadNormalize(TerminationEvidence {
                predicate: p,
                derivation,
                head_normal,
            }));
        }
    }
    Ok(TerminationVerdict::NoEvidence)
}

/// All normal predicates inferred for `e`, each paired with its derivation.
pub fn normal_predicates(
    ec: &ExecutionContext,
    env: &PredEnv,
    e: &Expr,
    c: &str,
    search_depth: usize,
) -> Result<Vec<(Predicate, Rc<Derivation>)>, PredicateError> {
    Ok(infer_with_derivations(ec, env, e, c, Bounds::new(search_depth))?
        .into_iter()
        .filter(|(p, _)| p.is_normal())
        .collect())
}
