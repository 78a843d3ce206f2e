//! A reference model of the predicate system for one fixed class table,
//! written without the library's typer, subpredicate relation, languages or
//! search. Judgements are computed bottom-up: for each expression, the rules
//! are applied to the (final) judgements of its subexpressions and then the
//! rules with premises on the expression itself are closed to a fixpoint.

use std::collections::{BTreeSet, HashMap};

use pfj::syntax::{name, Entry, Expr, Member, Predicate};

pub const SOURCE: &str = "class A extends Object { A f  A m() { this.f } } class B extends A { A m() { this } } null";

struct Class {
    name: &'static str,
    parent: Option<&'static str>,
    fields: Vec<(&'static str, &'static str)>,
    methods: Vec<(&'static str, &'static str, Expr)>,
}

pub type Judgement = (String, Predicate);
type Env = Vec<(String, String, Predicate)>;

pub struct Oracle {
    classes: Vec<Class>,
    depth: usize,
    width: usize,
    cache: HashMap<(Env, Expr), BTreeSet<Judgement>>,
    universes: HashMap<String, Vec<Predicate>>,
}

/// Possible static types: `None` is the type of `null`.
type Types = Option<BTreeSet<String>>;

impl Oracle {
    pub fn new(depth: usize, width: usize) -> Oracle {
        let classes = vec![
            Class { name: "Object", parent: None, fields: vec![], methods: vec![] },
            Class {
                name: "A",
                parent: Some("Object"),
                fields: vec![("f", "A")],
                methods: vec![("m", "A", Expr::this().field("f"))],
            },
            Class { name: "B", parent: Some("A"), fields: vec![], methods: vec![("m", "A", Expr::this())] },
        ];
        for c in &classes {
            for (_, _, body) in &c.methods {
                assert!(!contains_new(body), "the oracle requires method bodies without object creation");
            }
        }
        let mut oracle = Oracle { classes, depth, width, cache: HashMap::new(), universes: HashMap::new() };
        for c in oracle.class_names() {
            let u = oracle.build_universe(&c);
            oracle.universes.insert(c, u);
        }
        oracle
    }

    pub fn class_names(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.name.to_string()).collect()
    }

    fn class(&self, c: &str) -> &Class {
        self.classes.iter().find(|k| k.name == c).expect("known class")
    }

    fn chain(&self, c: &str) -> Vec<&Class> {
        let mut out = vec![self.class(c)];
        while let Some(p) = out.last().unwrap().parent {
            out.push(self.class(p));
        }
        out
    }

    fn is_sub(&self, c: &str, d: &str) -> bool {
        self.chain(c).iter().any(|k| k.name == d)
    }

    /// Fields in constructor order: inherited first.
    fn fields(&self, c: &str) -> Vec<(&'static str, &'static str)> {
        self.chain(c).iter().rev().flat_map(|k| k.fields.clone()).collect()
    }

    fn field_type(&self, c: &str, f: &str) -> Option<&'static str> {
        self.fields(c).into_iter().find(|(g, _)| *g == f).map(|(_, t)| t)
    }

    /// Return type and body of the most specific definition.
    fn method(&self, c: &str, m: &str) -> Option<(&'static str, &Expr)> {
        self.chain(c).into_iter().find_map(|k| k.methods.iter().find(|(n, _, _)| *n == m).map(|(_, r, b)| (*r, b)))
    }

    fn method_labels(&self, c: &str) -> Vec<&'static str> {
        let mut out: Vec<&'static str> =
            self.chain(c).iter().flat_map(|k| k.methods.iter().map(|(n, _, _)| *n)).collect();
        out.sort();
        out.dedup();
        out
    }

    fn types(&self, env: &Env, e: &Expr) -> Option<Types> {
        let receivers = |t: Types, has: &dyn Fn(&str) -> bool| -> BTreeSet<String> {
            match t {
                None => self.class_names().into_iter().filter(|c| has(c)).collect(),
                Some(set) => set.into_iter().filter(|c| has(c)).collect(),
            }
        };
        let fits = |t: &Types, c: &str| match t {
            None => true,
            Some(set) => set.iter().any(|d| self.is_sub(d, c)),
        };
        match e {
            Expr::Null => Some(None),
            Expr::Var(x) => env.iter().find(|(y, _, _)| **y == **x).map(|(_, c, _)| Some(BTreeSet::from([c.clone()]))),
            Expr::New(c, args) => {
                let fields = self.fields(c);
                if fields.len() != args.len() {
                    return None;
                }
                for ((_, t), a) in fields.iter().zip(args) {
                    if !fits(&self.types(env, a)?, t) {
                        return None;
                    }
                }
                Some(Some(BTreeSet::from([c.to_string()])))
            }
            Expr::Field(r, f) => {
                let rs = receivers(self.types(env, r)?, &|c| self.field_type(c, f).is_some());
                let out: BTreeSet<String> = rs.iter().map(|c| self.field_type(c, f).unwrap().to_string()).collect();
                (!out.is_empty()).then_some(Some(out))
            }
            Expr::Assign(r, f, v) => {
                let vt = self.types(env, v)?;
                let rs = receivers(self.types(env, r)?, &|c| self.field_type(c, f).is_some_and(|t| fits(&vt, t)));
                (!rs.is_empty()).then_some(Some(rs))
            }
            Expr::Invoke(r, m, args) => {
                if !args.is_empty() {
                    return None;
                }
                let rs = receivers(self.types(env, r)?, &|c| self.method(c, m).is_some());
                let out: BTreeSet<String> = rs.iter().map(|c| self.method(c, m).unwrap().0.to_string()).collect();
                (!out.is_empty()).then_some(Some(out))
            }
            Expr::Omega => None,
        }
    }

    fn typable_in(&self, env: &Env, e: &Expr, c: &str) -> bool {
        match self.types(env, e) {
            None => false,
            Some(None) => true,
            Some(Some(set)) => set.iter().any(|d| self.is_sub(d, c)),
        }
    }

    fn in_language(&self, c: &str, p: &Predicate) -> bool {
        let Predicate::Object(entries) = p else { return true };
        entries.iter().all(|en| match &en.member {
            Member::Value(s) => {
                self.field_type(c, &en.label).is_some_and(|d| *s != Predicate::Top && self.in_language(d, s))
            }
            Member::Method { this, args, result } => match self.method(c, &en.label) {
                Some((ret, _)) => {
                    args.is_empty()
                        && *result != Predicate::Top
                        && self.in_language(c, this)
                        && self.in_language(ret, result)
                }
                None => false,
            },
        })
    }

    fn depth_of(p: &Predicate) -> usize {
        match p {
            Predicate::Object(es) => es
                .iter()
                .map(|e| {
                    1 + match &e.member {
                        Member::Value(s) => Self::depth_of(s),
                        Member::Method { this, args, result } => {
                            args.iter().chain([this, result]).map(Self::depth_of).max().unwrap_or(0)
                        }
                    }
                })
                .max()
                .unwrap_or(0),
            _ => 0,
        }
    }

    /// Atoms and singletons of depth at most `k` in the language of `c`.
    fn narrow(&self, c: &str, k: usize) -> Vec<Predicate> {
        let mut out = vec![Predicate::Top, Predicate::Nil, Predicate::Object(vec![])];
        out.extend(self.entries(c, k).into_iter().map(|e| Predicate::Object(vec![e])));
        out
    }

    fn entries(&self, c: &str, k: usize) -> Vec<Entry> {
        if k == 0 {
            return vec![];
        }
        let mut out = Vec::new();
        for (f, t) in self.fields(c) {
            for s in self.narrow(t, k - 1) {
                if s != Predicate::Top {
                    out.push(Entry { label: name(f), member: Member::Value(s) });
                }
            }
        }
        for m in self.method_labels(c) {
            let (ret, _) = self.method(c, m).unwrap();
            for this in self.narrow(c, k - 1) {
                for result in self.narrow(ret, k - 1) {
                    if result != Predicate::Top {
                        out.push(Entry {
                            label: name(m),
                            member: Member::Method { this: this.clone(), args: vec![], result },
                        });
                    }
                }
            }
        }
        out
    }

    fn build_universe(&self, c: &str) -> Vec<Predicate> {
        let mut out = self.narrow(c, self.depth);
        let entries = self.entries(c, self.depth);
        let mut layer: Vec<Vec<Entry>> = entries.iter().map(|e| vec![e.clone()]).collect();
        for _ in 1..self.width {
            layer = layer
                .iter()
                .flat_map(|prefix| entries.iter().map(move |e| [prefix.clone(), vec![e.clone()]].concat()))
                .collect();
            out.extend(layer.iter().cloned().map(Predicate::Object));
        }
        debug_assert!(out.iter().all(|p| self.in_language(c, p) && Self::depth_of(p) <= self.depth));
        out
    }

    pub fn universe(&self, c: &str) -> &[Predicate] {
        &self.universes[c]
    }

    fn admitted(&self, c: &str, p: &Predicate) -> bool {
        self.universes[c].contains(p)
    }

    fn admit(&self, typed: &[String], facts: &mut BTreeSet<Judgement>, c: &str, p: Predicate) {
        if typed.iter().any(|t| t == c) && self.admitted(c, &p) {
            facts.insert((c.to_string(), p));
        }
    }

    fn below(p: &Predicate, q: &Predicate) -> bool {
        match (p, q) {
            (_, Predicate::Top) => true,
            (Predicate::Object(ps), Predicate::Object(qs)) => qs.iter().all(|e| ps.contains(e)),
            _ => p == q,
        }
    }

    /// Every `(C, p)` with `⊢ e : C : p` under the empty environment.
    pub fn judgements(&mut self, e: &Expr) -> BTreeSet<Judgement> {
        self.saturate(&Vec::new(), e)
    }

    fn saturate(&mut self, env: &Env, e: &Expr) -> BTreeSet<Judgement> {
        let key = (env.clone(), e.clone());
        if let Some(hit) = self.cache.get(&key) {
            return hit.clone();
        }
        let typed: Vec<String> = self.class_names().into_iter().filter(|c| self.typable_in(env, e, c)).collect();
        let mut facts: BTreeSet<Judgement> = BTreeSet::new();
        for c in &typed {
            self.admit(&typed, &mut facts, c, Predicate::Top);
        }
        match e {
            Expr::Null => {
                for c in &typed {
                    self.admit(&typed, &mut facts, c, Predicate::Nil);
                }
            }
            Expr::Var(x) => {
                for (y, c, p) in env {
                    if **y == **x && self.admitted(c, p) {
                        self.admit(&typed, &mut facts, c, p.clone());
                    }
                }
            }
            Expr::New(c, args) => {
                self.admit(&typed, &mut facts, c, Predicate::Object(vec![]));
                let fields = self.fields(c);
                for ((f, t), a) in fields.iter().zip(args) {
                    for (d, s) in self.saturate(env, a) {
                        if d == *t && s != Predicate::Top {
                            self.admit(
                                &typed,
                                &mut facts,
                                c,
                                Predicate::Object(vec![Entry { label: name(f), member: Member::Value(s) }]),
                            );
                        }
                    }
                }
                let methods: Vec<Predicate> = self.universes[&**c]
                    .iter()
                    .filter(|p| matches!(p, Predicate::Object(es) if es.len() == 1 && es[0].is_method()))
                    .cloned()
                    .collect();
                for p in methods {
                    let Member::Method { this, result, .. } = &p.entries()[0].member else { unreachable!() };
                    let (ret, body) = self.method(c, &p.entries()[0].label).unwrap();
                    let body = body.clone();
                    let inner: Env = vec![("this".into(), c.to_string(), this.clone())];
                    if self.saturate(&inner, &body).contains(&(ret.to_string(), result.clone())) {
                        self.admit(&typed, &mut facts, c, p.clone());
                    }
                }
            }
            Expr::Field(r, f) => {
                for (d, p) in self.saturate(env, r) {
                    if let Predicate::Object(es) = &p {
                        if let ([en], Some(t)) = (es.as_slice(), self.field_type(&d, f)) {
                            if *en.label == **f {
                                if let Member::Value(s) = &en.member {
                                    self.admit(&typed, &mut facts, t, s.clone());
                                }
                            }
                        }
                    }
                }
            }
            Expr::Invoke(r, m, _) => {
                let rf = self.saturate(env, r);
                for (d, p) in &rf {
                    let Predicate::Object(es) = p else { continue };
                    let [en] = es.as_slice() else { continue };
                    let Member::Method { this, result, .. } = &en.member else { continue };
                    if *en.label == **m && rf.contains(&(d.clone(), this.clone())) {
                        if let Some((ret, _)) = self.method(d, m) {
                            self.admit(&typed, &mut facts, ret, result.clone());
                        }
                    }
                }
            }
            Expr::Assign(r, f, v) => {
                let rf = self.saturate(env, r);
                let vf = self.saturate(env, v);
                for (c, p) in &rf {
                    if let Predicate::Object(es) = p {
                        if let Some(t) = self.field_type(c, f) {
                            for (d, s) in &vf {
                                if d == t && *s != Predicate::Top {
                                    self.admit(
                                        &typed,
                                        &mut facts,
                                        c,
                                        Predicate::Object(vec![Entry {
                                            label: f.clone(),
                                            member: Member::Value(s.clone()),
                                        }]),
                                    );
                                }
                            }
                        }
                        if let [en] = es.as_slice() {
                            if en.label != *f {
                                self.admit(&typed, &mut facts, c, p.clone());
                            }
                        }
                    }
                }
            }
            Expr::Omega => {}
        }
        // Closure under subsumption, subtyping and join.
        loop {
            let before = facts.len();
            let current: Vec<Judgement> = facts.iter().cloned().collect();
            for (c, p) in &current {
                for q in self.universes[c].clone() {
                    if Self::below(p, &q) {
                        self.admit(&typed, &mut facts, c, q);
                    }
                }
                for d in self.chain(c).iter().map(|k| k.name) {
                    self.admit(&typed, &mut facts, d, p.clone());
                }
                for (c2, q) in &current {
                    if let (true, Predicate::Object(a), Predicate::Object(b)) = (c == c2, p, q) {
                        self.admit(&typed, &mut facts, c, Predicate::Object([a.clone(), b.clone()].concat()));
                    }
                }
            }
            if facts.len() == before {
                break;
            }
        }
        self.cache.insert(key, facts.clone());
        facts
    }
}

fn contains_new(e: &Expr) -> bool {
    match e {
        Expr::New(..) => true,
        Expr::Var(_) | Expr::Null | Expr::Omega => false,
        Expr::Field(r, _) => contains_new(r),
        Expr::Assign(r, _, v) => contains_new(r) || contains_new(v),
        Expr::Invoke(r, _, args) => contains_new(r) || args.iter().any(contains_new),
    }
}

/// Closed expressions over the oracle's class table with at most `max`
/// constructors.
pub fn expressions(max: usize) -> Vec<Expr> {
    let mut by_size: Vec<Vec<Expr>> = vec![vec![]; max + 1];
    for n in 1..=max {
        let mut out = Vec::new();
        if n == 1 {
            out.push(Expr::Null);
            out.push(Expr::new_object("Object", vec![]));
        } else {
            for e in &by_size[n - 1] {
                out.push(Expr::new_object("A", vec![e.clone()]));
                out.push(Expr::new_object("B", vec![e.clone()]));
                out.push(e.clone().field("f"));
                out.push(e.clone().invoke("m", vec![]));
            }
            for k in 1..n - 1 {
                for r in &by_size[k] {
                    for v in &by_size[n - 1 - k] {
                        out.push(r.clone().assign("f", v.clone()));
                    }
                }
            }
        }
        by_size[n] = out;
    }
    by_size.into_iter().flatten().collect()
}

/// Result of comparing the prover with the reference model.
#[derive(Debug, Default)]
pub struct Comparison {
    pub queries: usize,
    pub provable: usize,
    pub disagreements: Vec<String>,
}

/// Asks the prover every query `⊢ e : C : p` with `e` among
/// [`expressions`]`(max_size)`, `C` a class `e` types at and `p` in the
/// reference universe, and records where it differs from the model. Typing
/// disagreements are recorded too.
pub fn compare(max_size: usize, depth: usize, width: usize) -> Comparison {
    use pfj::predicates::{Bounds, PredEnv, Prover};

    let ec = pfj::ExecutionContext::new(pfj::parse_program(SOURCE).unwrap().classes);
    let mut oracle = Oracle::new(depth, width);
    let mut prover = Prover::new(&ec, Bounds::new(depth).with_width(width));
    let env = PredEnv::new();
    let mut out = Comparison::default();
    for e in expressions(max_size) {
        let facts = oracle.judgements(&e);
        for c in oracle.class_names() {
            let typed = oracle.typable_in(&Vec::new(), &e, &c);
            if typed != pfj::typecheck::check_type(&ec, &Default::default(), &e, &c).unwrap_or(false) {
                out.disagreements.push(format!("typing of {e} at {c}"));
            }
            if !typed {
                continue;
            }
            for p in oracle.universe(&c).to_vec() {
                let expected = facts.contains(&(c.clone(), p.clone()));
                let found = prover.prove(&env, &e, &c, &p).map(|d| d.is_some());
                out.queries += 1;
                out.provable += expected as usize;
                if found != Ok(expected) {
                    out.disagreements.push(format!("{e} : {c} : {p}: model {expected}, prover {found:?}"));
                }
            }
        }
    }
    out
}
