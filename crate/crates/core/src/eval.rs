//! Small-step reduction: deterministic leftmost-outermost stepping, full
//! reduct enumeration, the omega-extended relation and normal-form tests.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::context::{ExecutionContext, LookupError};
use crate::syntax::{Expr, Name, THIS};

/// A redex whose contraction is undefined. Only ill-typed terms hit these.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Lookup(#[from] LookupError),
    #[error("`new {class}` given {given} arguments for {expected} fields")]
    ConstructorArity { class: Name, expected: usize, given: usize },
    #[error("method {method} expects {expected} arguments, {given} given")]
    MethodArity { method: Name, expected: usize, given: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Stepped(Expr),
    AlreadyNormal,
    /// A member operation on `null`; carries the stuck subterm.
    StuckNullDeref(String),
    /// No rule applies and the term is not a head normal form; carries the
    /// blocking receiver.
    StuckOpen(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Normal,
    BudgetExhausted,
    StuckNull,
    StuckOpen,
}

impl Outcome {
    pub fn tag(self) -> &'static str {
        match self {
            Outcome::Normal => "normal",
            Outcome::BudgetExhausted => "budget-exhausted",
            Outcome::StuckNull => "stuck-null",
            Outcome::StuckOpen => "stuck-open",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Reduction {
    pub expr: Expr,
    pub steps: usize,
    pub outcome: Outcome,
    /// Every expression visited, starting with the input. Empty unless requested.
    pub trace: Vec<Expr>,
}

fn field_index(ec: &ExecutionContext, class: &Name, args: &[Expr], f: &Name) -> Result<usize, EvalError> {
    let fields = ec.fields_of(class)?;
    if fields.len() != args.len() {
        return Err(EvalError::ConstructorArity { class: class.clone(), expected: fields.len(), given: args.len() });
    }
    fields
        .iter()
        .position(|g| g == f)
        .ok_or_else(|| LookupError::UnknownField { class: class.clone(), field: f.clone() }.into())
}

/// Contracts `e` at the root, if the root is a redex.
fn contract(ec: &ExecutionContext, e: &Expr, omega: bool) -> Option<Result<Expr, EvalError>> {
    let recv = e.receiver()?;
    if omega && *recv == Expr::Omega {
        return Some(Ok(Expr::Omega));
    }
    let Expr::New(class, fields) = recv else {
        return None;
    };
    Some(match e {
        Expr::Field(_, f) => field_index(ec, class, fields, f).map(|i| fields[i].clone()),
        Expr::Assign(_, f, v) => field_index(ec, class, fields, f).map(|i| {
            let mut updated = fields.clone();
            updated[i] = (**v).clone();
            Expr::New(class.clone(), updated)
        }),
        Expr::Invoke(_, m, args) => ec.method_body(class, m).map_err(EvalError::from).and_then(|mb| {
            let params = mb.params();
            if params.len() != args.len() {
                return Err(EvalError::MethodArity { method: m.clone(), expected: params.len(), given: args.len() });
            }
            let mut bindings: HashMap<Name, Expr> = params.into_iter().zip(args.iter().cloned()).collect();
            bindings.insert(Name::from(THIS), recv.clone());
            Ok(mb.body().substitute(&bindings))
        }),
        _ => unreachable!("receiver() only matches member operations"),
    })
}

/// Rebuilds `e` with its `i`-th immediate subterm replaced.
fn replace_child(e: &Expr, i: usize, child: Expr) -> Expr {
    let mut out = e.clone();
    match &mut out {
        Expr::Field(r, _) => **r = child,
        Expr::Assign(r, _, v) => {
            if i == 0 {
                **r = child
            } else {
                **v = child
            }
        }
        Expr::Invoke(r, _, args) => {
            if i == 0 {
                **r = child
            } else {
                args[i - 1] = child
            }
        }
        Expr::New(_, args) => args[i] = child,
        Expr::Var(_) | Expr::Null | Expr::Omega => unreachable!("leaves have no children"),
    }
    out
}

/// Immediate subterms in left-to-right order: receiver first.
pub fn children(e: &Expr) -> Vec<&Expr> {
    match e {
        Expr::Var(_) | Expr::Null | Expr::Omega => vec![],
        Expr::Field(r, _) => vec![r],
        Expr::Assign(r, _, v) => vec![r, v],
        Expr::Invoke(r, _, args) => std::iter::once(&**r).chain(args).collect(),
        Expr::New(_, args) => args.iter().collect(),
    }
}

fn leftmost_outermost(ec: &ExecutionContext, e: &Expr, omega: bool) -> Option<Result<Expr, EvalError>> {
    if let Some(r) = contract(ec, e, omega) {
        return Some(r);
    }
    for (i, c) in children(e).into_iter().enumerate() {
        if let Some(r) = leftmost_outermost(ec, c, omega) {
            return Some(r.map(|c2| replace_child(e, i, c2)));
        }
    }
    None
}

fn first_null_deref(e: &Expr) -> Option<&Expr> {
    if matches!(e.receiver(), Some(Expr::Null)) {
        return Some(e);
    }
    children(e).into_iter().find_map(first_null_deref)
}

fn blocking_receiver(e: &Expr) -> &Expr {
    match e.receiver() {
        Some(r) if r.receiver().is_some() => blocking_receiver(r),
        Some(r) => r,
        None => e,
    }
}

fn step_with(ec: &ExecutionContext, e: &Expr, omega: bool) -> Result<StepOutcome, EvalError> {
    if let Some(r) = leftmost_outermost(ec, e, omega) {
        return r.map(StepOutcome::Stepped);
    }
    if let Some(stuck) = first_null_deref(e) {
        return Ok(StepOutcome::StuckNullDeref(stuck.to_string()));
    }
    if is_head_normal(e) || (omega && is_approx_normal(e)) {
        Ok(StepOutcome::AlreadyNormal)
    } else {
        Ok(StepOutcome::StuckOpen(blocking_receiver(e).to_string()))
    }
}

/// One leftmost-outermost step.
pub fn step(ec: &ExecutionContext, e: &Expr) -> Result<StepOutcome, EvalError> {
    step_with(ec, e, false)
}

/// One step of the relation extended with `omega.f -> omega`,
/// `omega.f = a -> omega` and `omega.m(..) -> omega`.
pub fn step_omega(ec: &ExecutionContext, a: &Expr) -> Result<StepOutcome, EvalError> {
    step_with(ec, a, true)
}

pub fn reduce(ec: &ExecutionContext, e: &Expr, max_steps: usize, record_trace: bool) -> Result<Reduction, EvalError> {
    let mut cur = e.clone();
    let mut steps = 0;
    let mut trace = Vec::new();
    if record_trace {
        trace.push(cur.clone());
    }
    loop {
        let outcome = match step(ec, &cur)? {
            StepOutcome::Stepped(next) => {
                if steps == max_steps {
                    Outcome::BudgetExhausted
                } else {
                    cur = next;
                    steps += 1;
                    if record_trace {
                        trace.push(cur.clone());
                    }
                    continue;
                }
            }
            StepOutcome::AlreadyNormal => Outcome::Normal,
            StepOutcome::StuckNullDeref(_) => Outcome::StuckNull,
            StepOutcome::StuckOpen(_) => Outcome::StuckOpen,
        };
        return Ok(Reduction { expr: cur, steps, outcome, trace });
    }
}

/// Steps until a head normal form is reached. `None` when the budget runs
/// out or the term gets stuck first.
pub fn reduce_to_head_normal(ec: &ExecutionContext, e: &Expr, max_steps: usize) -> Option<(Expr, usize)> {
    let mut cur = e.clone();
    for steps in 0..=max_steps {
        if is_head_normal(&cur) {
            return Some((cur, steps));
        }
        match step(ec, &cur) {
            Ok(StepOutcome::Stepped(next)) => cur = next,
            _ => return None,
        }
    }
    None
}

/// All one-step reducts, contracting at any position.
pub fn one_step_reducts(ec: &ExecutionContext, e: &Expr, omega: bool) -> Vec<Expr> {
    let mut out = Vec::new();
    if let Some(Ok(r)) = contract(ec, e, omega) {
        out.push(r);
    }
    for (i, c) in children(e).into_iter().enumerate() {
        for r in one_step_reducts(ec, c, omega) {
            out.push(replace_child(e, i, r));
        }
    }
    out
}

/// Reducts of an expression within a step budget, in breadth-first order.
#[derive(Debug, Clone)]
pub struct Reducts {
    /// Each reduct with the length of a shortest reduction reaching it.
    pub items: Vec<(Expr, usize)>,
    /// True when every reduct of every member is itself a member.
    pub complete: bool,
}

impl Reducts {
    pub fn contains(&self, e: &Expr) -> bool {
        self.items.iter().any(|(x, _)| x == e)
    }

    pub fn exprs(&self) -> impl Iterator<Item = &Expr> {
        self.items.iter().map(|(e, _)| e)
    }
}

pub fn enumerate_reducts(ec: &ExecutionContext, e: &Expr, budget: usize) -> Reducts {
    enumerate_reducts_with(ec, e, budget, false)
}

/// As [`enumerate_reducts`]; with `parallel` the frontier is expanded on the
/// rayon pool. The result does not depend on the flag.
pub fn enumerate_reducts_with(ec: &ExecutionContext, e: &Expr, budget: usize, parallel: bool) -> Reducts {
    let mut seen: HashSet<Expr> = HashSet::new();
    let mut items = vec![(e.clone(), 0)];
    seen.insert(e.clone());
    let mut frontier = vec![e.clone()];
    for depth in 1..=budget {
        if frontier.is_empty() {
            break;
        }
        let expanded: Vec<Vec<Expr>> = if parallel {
            frontier.par_iter().map(|x| one_step_reducts(ec, x, false)).collect()
        } else {
            frontier.iter().map(|x| one_step_reducts(ec, x, false)).collect()
        };
        let mut next = Vec::new();
        for r in expanded.into_iter().flatten() {
            if seen.insert(r.clone()) {
                items.push((r.clone(), depth));
                next.push(r);
            }
        }
        frontier = next;
    }
    let complete = frontier.iter().all(|x| one_step_reducts(ec, x, false).iter().all(|r| seen.contains(r)));
    Reducts { items, complete }
}

/// `H ::= x | null | new C(e..) | H.f | H.f = e | H.m(e..)` where the
/// receiver `H` is neither `null` nor an object creation.
pub fn is_head_normal(e: &Expr) -> bool {
    match e {
        Expr::Var(_) | Expr::Null | Expr::New(..) => true,
        Expr::Omega => false,
        _ => {
            let r = e.receiver().expect("member operation");
            !matches!(r, Expr::Null | Expr::New(..)) && is_head_normal(r)
        }
    }
}

/// Approximate normal forms: member receivers are neither omega nor object
/// creations, and every subterm is itself approximate normal.
pub fn is_approx_normal(a: &Expr) -> bool {
    match a {
        Expr::Var(_) | Expr::Null | Expr::Omega => true,
        Expr::New(_, args) => args.iter().all(is_approx_normal),
        _ => {
            let r = a.receiver().expect("member operation");
            !matches!(r, Expr::Omega | Expr::New(..)) && children(a).into_iter().all(is_approx_normal)
        }
    }
}
