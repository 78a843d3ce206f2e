//! Generators: proptest strategies for syntax and a seeded generator of
//! type-consistent programs.

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use pfj::context::ExecutionContext;
use pfj::syntax::{
    name, ClassDecl, Entry, Expr, FieldDecl, Member, MethodDecl, Name, Param, Predicate, Program, OBJECT,
};
use pfj::typecheck::{Ty, TypeChecker, TypeEnv};

const LABELS: &[&str] = &["f", "g", "m", "n"];
const VARS: &[&str] = &["x", "y", "this"];
const CLASSES: &[&str] = &["C", "D"];

fn label() -> impl Strategy<Value = Name> {
    prop::sample::select(LABELS).prop_map(name)
}

fn normal_leaf() -> impl Strategy<Value = Predicate> {
    prop_oneof![Just(Predicate::Nil), Just(Predicate::empty())]
}

/// Valid predicates: field members and method results are normal.
pub fn predicate() -> impl Strategy<Value = Predicate> {
    let leaf = prop_oneof![Just(Predicate::Top), normal_leaf()];
    leaf.prop_recursive(3, 24, 3, |inner| {
        let normal = inner.clone().prop_map(|p| if p.is_normal() { p } else { Predicate::Nil });
        let entry = prop_oneof![
            (label(), normal.clone()).prop_map(|(label, p)| Entry { label, member: Member::Value(p) }),
            (label(), inner.clone(), prop::collection::vec(inner, 0..3), normal).prop_map(
                |(label, this, args, result)| { Entry { label, member: Member::Method { this, args, result } } }
            ),
        ];
        prop_oneof![
            1 => Just(Predicate::Top),
            4 => prop::collection::vec(entry, 0..4).prop_map(Predicate::Object),
        ]
    })
}

pub fn object_predicate() -> impl Strategy<Value = Predicate> {
    predicate().prop_map(|p| if p.is_object() { p } else { Predicate::empty() })
}

/// An object predicate together with sub-selections of its entries, so that
/// `p ⊴ q ⊴ r` holds by construction.
pub fn predicate_chain() -> impl Strategy<Value = (Predicate, Predicate, Predicate)> {
    object_predicate().prop_flat_map(|p| {
        let n = p.width();
        (Just(p), prop::collection::vec(any::<bool>(), n), prop::collection::vec(any::<bool>(), n)).prop_map(
            |(p, keep_q, keep_r)| {
                let q: Vec<Entry> =
                    p.entries().iter().zip(&keep_q).filter(|(_, k)| **k).map(|(e, _)| e.clone()).collect();
                let r: Vec<Entry> = p
                    .entries()
                    .iter()
                    .zip(keep_q.iter().zip(&keep_r))
                    .filter(|(_, (a, b))| **a && **b)
                    .map(|(e, _)| e.clone())
                    .collect();
                (p, Predicate::Object(q), Predicate::Object(r))
            },
        )
    })
}

fn expr_with(omega: bool, depth: u32, size: u32) -> BoxedStrategy<Expr> {
    let mut leaves =
        vec![prop::sample::select(VARS).prop_map(|x| Expr::Var(name(x))).boxed(), Just(Expr::Null).boxed()];
    if omega {
        leaves.push(Just(Expr::Omega).boxed());
    }
    let leaf = prop::strategy::Union::new(leaves);
    leaf.prop_recursive(depth, size, 3, |inner| {
        let args = prop::collection::vec(inner.clone(), 0..3);
        prop_oneof![
            (inner.clone(), label()).prop_map(|(r, f)| Expr::Field(Box::new(r), f)),
            (inner.clone(), label(), inner.clone()).prop_map(|(r, f, v)| Expr::Assign(Box::new(r), f, Box::new(v))),
            (inner.clone(), label(), args.clone()).prop_map(|(r, m, a)| Expr::Invoke(Box::new(r), m, a)),
            (prop::sample::select(CLASSES), args).prop_map(|(c, a)| Expr::New(name(c), a)),
        ]
    })
    .boxed()
}

pub fn expr() -> BoxedStrategy<Expr> {
    expr_with(false, 4, 32)
}

pub fn approx_expr() -> BoxedStrategy<Expr> {
    expr_with(true, 4, 32)
}

/// Replaces the subterms selected by `mask` (preorder positions, cycled)
/// with omega, giving an expression below `e` in the approximation order.
pub fn omegafy(e: &Expr, mask: &[bool]) -> Expr {
    fn go(e: &Expr, mask: &[bool], pos: &mut usize) -> Expr {
        let hit = !mask.is_empty() && mask[*pos % mask.len()];
        *pos += 1;
        if hit {
            return Expr::Omega;
        }
        match e {
            Expr::Var(_) | Expr::Null | Expr::Omega => e.clone(),
            Expr::Field(r, f) => Expr::Field(Box::new(go(r, mask, pos)), f.clone()),
            Expr::Assign(r, f, v) => {
                let r = go(r, mask, pos);
                Expr::Assign(Box::new(r), f.clone(), Box::new(go(v, mask, pos)))
            }
            Expr::Invoke(r, m, args) => {
                let r = go(r, mask, pos);
                Expr::Invoke(Box::new(r), m.clone(), args.iter().map(|a| go(a, mask, pos)).collect())
            }
            Expr::New(c, args) => Expr::New(c.clone(), args.iter().map(|a| go(a, mask, pos)).collect()),
        }
    }
    go(e, mask, &mut 0)
}

/// An approximate expression with two successively coarser approximations:
/// `(a, b, c)` with `c ⊑ b ⊑ a`.
pub fn approx_chain() -> impl Strategy<Value = (Expr, Expr, Expr)> {
    (
        approx_expr(),
        prop::collection::vec(prop::bool::weighted(0.2), 1..8),
        prop::collection::vec(prop::bool::weighted(0.2), 1..8),
    )
        .prop_map(|(a, m1, m2)| {
            let b = omegafy(&a, &m1);
            let c = omegafy(&b, &m2);
            (a, b, c)
        })
}

/// Every expression obtained by replacing some subterms with omega.
pub fn all_below(e: &Expr) -> Vec<Expr> {
    let mut out = vec![Expr::Omega];
    let inner: Vec<Expr> = match e {
        Expr::Var(_) | Expr::Null | Expr::Omega => vec![e.clone()],
        Expr::Field(r, f) => all_below(r).into_iter().map(|r| Expr::Field(Box::new(r), f.clone())).collect(),
        Expr::Assign(r, f, v) => {
            let vs = all_below(v);
            all_below(r)
                .into_iter()
                .flat_map(|r| vs.iter().map(move |v| Expr::Assign(Box::new(r.clone()), f.clone(), Box::new(v.clone()))))
                .collect()
        }
        Expr::Invoke(r, m, args) => products(args)
            .into_iter()
            .flat_map(|a| all_below(r).into_iter().map(move |r| Expr::Invoke(Box::new(r), m.clone(), a.clone())))
            .collect(),
        Expr::New(c, args) => products(args).into_iter().map(|a| Expr::New(c.clone(), a)).collect(),
    };
    out.extend(inner);
    out.sort();
    out.dedup();
    out
}

fn products(args: &[Expr]) -> Vec<Vec<Expr>> {
    let mut acc = vec![Vec::new()];
    for a in args {
        let below = all_below(a);
        acc = acc
            .into_iter()
            .flat_map(|prefix| below.iter().map(move |b| [prefix.clone(), vec![b.clone()]].concat()))
            .collect();
    }
    acc
}

/// Bounds for random programs.
#[derive(Debug, Clone, Copy)]
pub struct ProgramShape {
    pub max_classes: usize,
    pub max_members: usize,
    pub main_depth: usize,
    pub body_depth: usize,
}

impl Default for ProgramShape {
    fn default() -> Self {
        ProgramShape { max_classes: 4, max_members: 3, main_depth: 5, body_depth: 3 }
    }
}

/// A random program whose classes are well formed and type consistent and
/// whose main expression has a class type.
pub fn random_program(seed: u64, shape: ProgramShape) -> Program {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = rng.gen_range(1..=shape.max_classes);
    let class_names: Vec<Name> = (0..n).map(|i| name(&format!("K{i}"))).collect();
    let mut all_types: Vec<Name> = class_names.clone();
    all_types.push(name(OBJECT));
    let mut classes: Vec<ClassDecl> = Vec::new();
    let mut field_counter = 0;
    let mut method_counter = 0;
    for (i, c) in class_names.iter().enumerate() {
        let superclass =
            if i == 0 || rng.gen_bool(0.4) { name(OBJECT) } else { class_names[rng.gen_range(0..i)].clone() };
        let fields = (0..rng.gen_range(0..=shape.max_members))
            .map(|_| {
                field_counter += 1;
                FieldDecl { ty: all_types.choose(&mut rng).unwrap().clone(), name: name(&format!("f{field_counter}")) }
            })
            .collect();
        let mut methods: Vec<MethodDecl> = Vec::new();
        let inherited: Vec<MethodDecl> =
            ancestors(&classes, &superclass).into_iter().flat_map(|d| d.methods.clone()).collect();
        for _ in 0..rng.gen_range(0..=shape.max_members) {
            let overriding = !inherited.is_empty() && rng.gen_bool(0.4);
            let md = if overriding {
                let base = inherited.choose(&mut rng).unwrap();
                if methods.iter().any(|m| m.name == base.name) {
                    continue;
                }
                MethodDecl { body: Expr::Null, ..base.clone() }
            } else {
                method_counter += 1;
                let params = (0..rng.gen_range(0..=2))
                    .map(|j| Param { ty: all_types.choose(&mut rng).unwrap().clone(), name: name(&format!("p{j}")) })
                    .collect();
                MethodDecl {
                    return_type: all_types.choose(&mut rng).unwrap().clone(),
                    name: name(&format!("m{method_counter}")),
                    params,
                    body: Expr::Null,
                }
            };
            methods.push(md);
        }
        classes.push(ClassDecl { name: c.clone(), superclass, fields, methods });
    }
    let skeleton = ExecutionContext::new(classes.clone());
    let mut g = ExprGen { ec: &skeleton, rng: &mut rng, types: all_types.clone() };
    for cd in classes.iter_mut() {
        for md in cd.methods.iter_mut() {
            let mut env = TypeEnv::new();
            env.insert(name("this"), cd.name.clone());
            for p in &md.params {
                env.insert(p.name.clone(), p.ty.clone());
            }
            md.body = g.gen(&env, &md.return_type.clone(), shape.body_depth, false);
        }
    }
    let target = class_names.choose(g.rng).unwrap().clone();
    let main = g.gen(&TypeEnv::new(), &target, shape.main_depth, true);
    Program { classes, main }
}

fn ancestors<'a>(classes: &'a [ClassDecl], c: &Name) -> Vec<&'a ClassDecl> {
    let mut out = Vec::new();
    let mut cur = c.clone();
    while let Some(d) = classes.iter().find(|d| d.name == cur) {
        out.push(d);
        cur = d.superclass.clone();
    }
    out
}

struct ExprGen<'a, 'r> {
    ec: &'a ExecutionContext,
    rng: &'r mut StdRng,
    types: Vec<Name>,
}

impl ExprGen<'_, '_> {
    fn subtypes(&self, t: &Name) -> Vec<Name> {
        self.types.iter().filter(|d| self.ec.subtype(d, t).unwrap_or(false)).cloned().collect()
    }

    /// An expression typable at `t`. Receivers are never `null`, so the
    /// minimal type is always a class.
    fn gen(&mut self, env: &TypeEnv, t: &Name, depth: usize, no_null: bool) -> Expr {
        let vars: Vec<Name> =
            env.iter().filter(|(_, c)| self.ec.subtype(c, t).unwrap_or(false)).map(|(x, _)| x.clone()).collect();
        let news = self.subtypes(t);
        let mut fields = Vec::new();
        let mut methods = Vec::new();
        for d in self.types.clone() {
            for f in self.ec.fields_of(&d).unwrap_or_default() {
                let ft = self.ec.field_type(&d, &f).unwrap();
                if self.ec.subtype(&ft, t).unwrap_or(false) {
                    fields.push((d.clone(), f));
                }
            }
            for m in self.ec.method_names(&d).unwrap_or_default() {
                let sig = self.ec.method_type(&d, &m).unwrap();
                if self.ec.subtype(&sig.ret, t).unwrap_or(false) {
                    methods.push((d.clone(), m, sig));
                }
            }
        }
        let assignable: Vec<Name> =
            news.iter().filter(|d| !self.ec.fields_of(d).unwrap_or_default().is_empty()).cloned().collect();
        loop {
            let choice = if depth == 0 { self.rng.gen_range(0..3) } else { self.rng.gen_range(0..7) };
            match choice {
                0 if !no_null => return Expr::Null,
                1 if !vars.is_empty() => return Expr::Var(vars.choose(self.rng).unwrap().clone()),
                2 | 3 if !news.is_empty() => {
                    let d = news.choose(self.rng).unwrap().clone();
                    let tys: Vec<Name> = self.ec.fields(&d).unwrap().iter().map(|f| f.ty.clone()).collect();
                    let sub = depth.saturating_sub(1);
                    let args = tys
                        .iter()
                        .map(|ty| if depth == 0 { Expr::Null } else { self.gen(env, ty, sub, false) })
                        .collect();
                    return Expr::New(d, args);
                }
                4 if !fields.is_empty() => {
                    let (d, f) = fields.choose(self.rng).unwrap().clone();
                    return Expr::Field(Box::new(self.gen(env, &d, depth - 1, true)), f);
                }
                5 if !methods.is_empty() => {
                    let (d, m, sig) = methods.choose(self.rng).unwrap().clone();
                    let r = self.gen(env, &d, depth - 1, true);
                    let args = sig.params.iter().map(|p| self.gen(env, p, depth - 1, false)).collect();
                    return Expr::Invoke(Box::new(r), m, args);
                }
                6 if !assignable.is_empty() => {
                    let d = assignable.choose(self.rng).unwrap().clone();
                    let fs = self.ec.fields_of(&d).unwrap();
                    let f = fs.choose(self.rng).unwrap().clone();
                    let ft = self.ec.field_type(&d, &f).unwrap();
                    let r = self.gen(env, &d, depth - 1, true);
                    let v = self.gen(env, &ft, depth - 1, false);
                    return Expr::Assign(Box::new(r), f, Box::new(v));
                }
                _ => {}
            }
        }
    }
}

/// The class type of a closed expression, if it has one.
pub fn class_of(ec: &ExecutionContext, e: &Expr) -> Option<Name> {
    match TypeChecker::new(ec).min_type(&TypeEnv::new(), e).ok()? {
        Ty::Class(c) => Some(c),
        _ => None,
    }
}

/// Approximate expressions small enough to enumerate everything below them.
pub fn small_approx_expr() -> BoxedStrategy<Expr> {
    expr_with(true, 3, 6)
}

/// The reduction sequence of `e` for at most `steps` steps, cut short once
/// a term exceeds `max_size` nodes.
pub fn bounded_trace(ec: &ExecutionContext, e: &Expr, steps: usize, max_size: usize) -> Vec<Expr> {
    let mut trace = vec![e.clone()];
    for _ in 0..steps {
        let last = trace.last().unwrap();
        if last.size() > max_size {
            break;
        }
        match pfj::eval::step(ec, last) {
            Ok(pfj::eval::StepOutcome::Stepped(next)) => trace.push(next),
            _ => break,
        }
    }
    trace
}
