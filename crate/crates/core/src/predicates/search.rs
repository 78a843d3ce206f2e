//! Goal-directed proof search with a persistent memo table.
//!
//! Every node of a derivation is restricted to the bounded universe, which
//! makes the goal space finite. Goals met again while still being explored
//! fail tentatively; a top-level query is re-run until no new goal gets
//! proved, which yields the least fixpoint of the rules.

use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use super::derivation::{method_env, Derivation, Rule};
use super::relation::{check_env, in_language, subpredicate, PredEnv};
use super::universe::{Bounds, Languages};
use super::PredicateError;
use crate::context::ExecutionContext;
use crate::syntax::{Entry, Expr, Member, Name, Predicate};
use crate::typecheck::{Ty, TypeChecker, TypeEnv};

type Goal = (usize, Expr, Name, Predicate);
type Found = Result<Option<Rc<Derivation>>, PredicateError>;
type Provable = Vec<(Predicate, Rc<Derivation>)>;

#[derive(Debug, Clone)]
enum Memo {
    Proved(Rc<Derivation>),
    Failed,
    /// Failed while depending on a goal under exploration, in the given round.
    Tentative(usize),
}

pub struct Prover<'a> {
    ec: &'a ExecutionContext,
    tc: TypeChecker<'a>,
    bounds: Bounds,
    langs: Languages<'a>,
    env_ids: HashMap<Rc<PredEnv>, usize>,
    envs: Vec<(Rc<PredEnv>, TypeEnv)>,
    memo: HashMap<Goal, Memo>,
    provable: HashMap<(usize, Expr, Name, usize), Rc<Provable>>,
    active: HashSet<Goal>,
    round: usize,
    cycle_hits: usize,
    proved: usize,
}

impl<'a> Prover<'a> {
    pub fn new(ec: &'a ExecutionContext, bounds: Bounds) -> Prover<'a> {
        Prover {
            ec,
            tc: TypeChecker::new(ec),
            bounds,
            langs: Languages::new(ec, bounds.cap),
            env_ids: HashMap::new(),
            envs: Vec::new(),
            memo: HashMap::new(),
            provable: HashMap::new(),
            active: HashSet::new(),
            round: 0,
            cycle_hits: 0,
            proved: 0,
        }
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn languages(&self) -> &Languages<'a> {
        &self.langs
    }

    /// Number of goals proved so far.
    pub fn proved_goals(&self) -> usize {
        self.proved
    }

    /// Searches for a derivation of `env ⊢ e : c : p`. The query is assumed
    /// well formed; see [`super::check_predicate`] for the checked entry point.
    pub fn prove(&mut self, env: &PredEnv, e: &Expr, c: &str, p: &Predicate) -> Found {
        let env_id = self.intern(env.clone());
        let c = Name::from(c);
        loop {
            self.round += 1;
            let (hits, proved) = (self.cycle_hits, self.proved);
            let found = self.goal(env_id, e, &c, p)?;
            if found.is_some() || self.cycle_hits == hits || self.proved == proved {
                return Ok(found);
            }
        }
    }

    fn intern(&mut self, env: PredEnv) -> usize {
        if let Some(&id) = self.env_ids.get(&env) {
            return id;
        }
        let env = Rc::new(env);
        let id = self.envs.len();
        self.envs.push((env.clone(), env.erase()));
        self.env_ids.insert(env, id);
        id
    }

    fn node(
        &self,
        rule: Rule,
        env: usize,
        e: &Expr,
        c: &Name,
        p: &Predicate,
        premises: Vec<Rc<Derivation>>,
    ) -> Rc<Derivation> {
        Rc::new(Derivation {
            rule,
            env: self.envs[env].0.clone(),
            expr: e.clone(),
            class: c.clone(),
            predicate: p.clone(),
            premises,
        })
    }

    fn typed(&self, env: usize, e: &Expr, c: &str) -> bool {
        self.tc.check_type(&self.envs[env].1, e, c).unwrap_or(false)
    }

    /// The unique class the expression types at, if there is one.
    fn natural(&self, env: usize, e: &Expr) -> Option<Name> {
        match self.tc.types_of(&self.envs[env].1, e).ok()?.as_slice() {
            [Ty::Class(n)] => Some(n.clone()),
            _ => None,
        }
    }

    fn goal(&mut self, env: usize, e: &Expr, c: &Name, p: &Predicate) -> Found {
        let key: Goal = (env, e.clone(), c.clone(), p.clone());
        match self.memo.get(&key) {
            Some(Memo::Proved(d)) => return Ok(Some(d.clone())),
            Some(Memo::Failed) => return Ok(None),
            Some(Memo::Tentative(r)) if *r == self.round => {
                self.cycle_hits += 1;
                return Ok(None);
            }
            _ => {}
        }
        if self.active.contains(&key) {
            self.cycle_hits += 1;
            return Ok(None);
        }
        if !self.bounds.admits(self.ec, c, p) || !self.typed(env, e, c) {
            self.memo.insert(key, Memo::Failed);
            return Ok(None);
        }
        self.active.insert(key.clone());
        let hits = self.cycle_hits;
        let found = self.derive(env, e, c, p);
        self.active.remove(&key);
        let found = found?;
        let entry = match &found {
            Some(d) => {
                self.proved += 1;
                Memo::Proved(d.clone())
            }
            None if self.cycle_hits == hits => Memo::Failed,
            None => Memo::Tentative(self.round),
        };
        self.memo.insert(key, entry);
        Ok(found)
    }

    /// Width-one predicates of depth at most `depth` derivable for `e` at `c`.
    fn provable(&mut self, env: usize, e: &Expr, c: &Name, depth: usize) -> Result<Rc<Provable>, PredicateError> {
        let key = (env, e.clone(), c.clone(), depth);
        if let Some(hit) = self.provable.get(&key) {
            return Ok(hit.clone());
        }
        let hits = self.cycle_hits;
        let mut out = Vec::new();
        for p in self.langs.nested(depth, c)?.iter() {
            if let Some(d) = self.goal(env, e, c, p)? {
                out.push((p.clone(), d));
            }
        }
        let out = Rc::new(out);
        if self.cycle_hits == hits {
            self.provable.insert(key, out.clone());
        }
        Ok(out)
    }

    fn derive(&mut self, env: usize, e: &Expr, c: &Name, p: &Predicate) -> Found {
        if *p == Predicate::Top {
            return Ok(Some(self.node(Rule::Top, env, e, c, p, vec![])));
        }
        match e {
            Expr::Var(x) => {
                let Some(stmt) = self.envs[env].0.get(x).cloned() else { return Ok(None) };
                if stmt.class != *c {
                    let Some(d) = self.goal(env, e, &stmt.class, p)? else { return Ok(None) };
                    return Ok(Some(self.node(Rule::SubsType, env, e, c, p, vec![d])));
                }
                if !self.bounds.admits(self.ec, c, &stmt.pred) {
                    return Ok(None);
                }
                let var = self.node(Rule::Var, env, e, c, &stmt.pred, vec![]);
                if stmt.pred == *p {
                    Ok(Some(var))
                } else if subpredicate(&stmt.pred, p) {
                    Ok(Some(self.node(Rule::Sub, env, e, c, p, vec![var])))
                } else {
                    Ok(None)
                }
            }
            Expr::Null if *p == Predicate::Nil => Ok(Some(self.node(Rule::Null, env, e, c, p, vec![]))),
            Expr::Null | Expr::Omega => Ok(None),
            _ => {
                let Some(n) = self.natural(env, e) else { return Ok(None) };
                if n != *c {
                    let Some(d) = self.goal(env, e, &n, p)? else { return Ok(None) };
                    return Ok(Some(self.node(Rule::SubsType, env, e, c, p, vec![d])));
                }
                self.at_natural(env, e, c, p)
            }
        }
    }

    fn at_natural(&mut self, env: usize, e: &Expr, c: &Name, p: &Predicate) -> Found {
        if p.width() > 1 {
            let mut premises = Vec::new();
            for entry in p.entries() {
                let Some(d) = self.goal(env, e, c, &Predicate::singleton(entry.clone()))? else { return Ok(None) };
                premises.push(d);
            }
            return Ok(Some(self.node(Rule::Join, env, e, c, p, premises)));
        }
        if *p == Predicate::empty() {
            return self.empty_object(env, e, c);
        }
        match e {
            Expr::New(class, args) => {
                let Some(entry) = p.entries().first() else { return Ok(None) };
                self.creation(env, e, class, args, entry, p)
            }
            Expr::Field(r, f) => self.field(env, e, c, r, f, p),
            Expr::Invoke(r, m, args) => self.invoke(env, e, c, r, m, args, p),
            Expr::Assign(r, f, v) => {
                let Some(entry) = p.entries().first() else { return Ok(None) };
                if entry.label != *f {
                    let Some(d) = self.goal(env, r, c, p)? else { return Ok(None) };
                    return Ok(Some(self.node(Rule::AssP, env, e, c, p, vec![d])));
                }
                let Member::Value(sigma) = &entry.member else { return Ok(None) };
                let Ok(ty) = self.ec.field_type(c, f) else { return Ok(None) };
                let Some(dr) = self.goal(env, r, c, &Predicate::empty())? else { return Ok(None) };
                let Some(dv) = self.goal(env, v, &ty, sigma)? else { return Ok(None) };
                Ok(Some(self.node(Rule::AssF, env, e, c, p, vec![dr, dv])))
            }
            _ => Ok(None),
        }
    }

    fn empty_object(&mut self, env: usize, e: &Expr, c: &Name) -> Found {
        let p = Predicate::empty();
        let direct = match e {
            Expr::New(..) => return Ok(Some(self.node(Rule::NewO, env, e, c, &p, vec![]))),
            Expr::Field(r, f) => self.field(env, e, c, r, f, &p)?,
            Expr::Invoke(r, m, args) => self.invoke(env, e, c, r, m, args, &p)?,
            _ => None,
        };
        if direct.is_some() {
            return Ok(direct);
        }
        // Through a field access or an invocation the singleton sits one
        // level down inside a member predicate.
        let depth = match e {
            Expr::Field(..) | Expr::Invoke(..) => self.bounds.depth.saturating_sub(1),
            _ => self.bounds.depth,
        };
        let singles = self.langs.nested(depth, c)?;
        for q in singles.iter().filter(|q| q.width() == 1) {
            if let Some(d) = self.goal(env, e, c, q)? {
                return Ok(Some(self.node(Rule::Sub, env, e, c, &p, vec![d])));
            }
        }
        Ok(None)
    }

    fn creation(&mut self, env: usize, e: &Expr, class: &Name, args: &[Expr], entry: &Entry, p: &Predicate) -> Found {
        let ec = self.ec;
        match &entry.member {
            Member::Value(sigma) => {
                let Ok(fields) = ec.fields_of(class) else { return Ok(None) };
                let Some(i) = fields.iter().position(|f| *f == entry.label) else { return Ok(None) };
                let Ok(ty) = ec.field_type(class, &entry.label) else { return Ok(None) };
                let Some(d) = self.goal(env, &args[i], &ty, sigma)? else { return Ok(None) };
                Ok(Some(self.node(Rule::NewF, env, e, class, p, vec![d])))
            }
            Member::Method { this, args: psis, result } => {
                let (Ok(body), Ok(sig)) = (ec.method_body(class, &entry.label), ec.method_type(class, &entry.label))
                else {
                    return Ok(None);
                };
                let inner = method_env(class, this, &body.params(), &sig.params, psis);
                if check_env(ec, &inner).is_err() {
                    return Ok(None);
                }
                let inner = self.intern(inner);
                let Some(d) = self.goal(inner, body.body(), &sig.ret, result)? else { return Ok(None) };
                Ok(Some(self.node(Rule::NewM, env, e, class, p, vec![d])))
            }
        }
    }

    fn field(&mut self, env: usize, e: &Expr, c: &Name, r: &Expr, f: &Name, sigma: &Predicate) -> Found {
        let Some(nr) = self.natural(env, r) else { return Ok(None) };
        let Some(d) = self.goal(env, r, &nr, &Predicate::field(f, sigma.clone()))? else { return Ok(None) };
        Ok(Some(self.node(Rule::Fld, env, e, c, sigma, vec![d])))
    }

    #[allow(clippy::too_many_arguments)]
    fn invoke(
        &mut self,
        env: usize,
        e: &Expr,
        c: &Name,
        r: &Expr,
        m: &Name,
        args: &[Expr],
        sigma: &Predicate,
    ) -> Found {
        let depth = self.bounds.depth;
        if depth == 0 || sigma.depth() >= depth {
            return Ok(None);
        }
        let Some(nr) = self.natural(env, r) else { return Ok(None) };
        let Ok(sig) = self.ec.method_type(&nr, m) else { return Ok(None) };
        let mut provable_args = Vec::new();
        for (a, ci) in args.iter().zip(&sig.params) {
            let ok = self.provable(env, a, ci, depth - 1)?;
            if ok.is_empty() {
                return Ok(None);
            }
            provable_args.push(ok);
        }
        let combos: usize = provable_args.iter().map(|v| v.len()).product();
        let phis = self.provable(env, r, &nr, depth - 1)?;
        for (phi, dphi) in phis.iter() {
            let mut idx = vec![0usize; provable_args.len()];
            for _ in 0..combos {
                let psis: Vec<Predicate> = idx.iter().zip(&provable_args).map(|(&i, v)| v[i].0.clone()).collect();
                let mp = Predicate::method(m, phi.clone(), psis, sigma.clone());
                if let Some(dm) = self.goal(env, r, &nr, &mp)? {
                    let mut premises = vec![dm, dphi.clone()];
                    premises.extend(idx.iter().zip(&provable_args).map(|(&i, v)| v[i].1.clone()));
                    return Ok(Some(self.node(Rule::Invk, env, e, c, sigma, premises)));
                }
                for (slot, list) in idx.iter_mut().zip(&provable_args).rev() {
                    *slot += 1;
                    if *slot < list.len() {
                        break;
                    }
                    *slot = 0;
                }
            }
        }
        Ok(None)
    }
}

/// Validates a query: a well-formed environment, a predicate in the language
/// of the class, and an erased judgement that types.
pub fn validate_query(
    ec: &ExecutionContext,
    env: &PredEnv,
    e: &Expr,
    c: &str,
    p: &Predicate,
) -> Result<(), PredicateError> {
    let bad = |m: String| Err(PredicateError::IllFormedQuery(m));
    if let Err(vs) = check_env(ec, env) {
        return bad(format!("ill-formed environment: {}", vs[0]));
    }
    if !p.is_valid() {
        return bad(format!("{p} is not a valid predicate"));
    }
    match in_language(ec, c, p) {
        Err(err) => return bad(err.to_string()),
        Ok(false) => return bad(format!("{p} is not in the language of {c}")),
        Ok(true) => {}
    }
    match TypeChecker::new(ec).check_type(&env.erase(), e, c) {
        Ok(true) => Ok(()),
        Ok(false) => bad(format!("{e} does not have type {c}")),
        Err(err) => bad(err.to_string()),
    }
}
