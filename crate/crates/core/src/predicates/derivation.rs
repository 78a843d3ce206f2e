//! Predicate derivations, their rendering and an independent replay check.

use std::fmt::{self, Write};
use std::rc::Rc;

use serde_json::{json, Value};

use super::relation::{check_env, in_language, subpredicate, PredEnv, Statement};
use crate::context::ExecutionContext;
use crate::syntax::{Entry, Expr, Member, Name, Predicate, THIS};
use crate::typecheck::TypeChecker;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Var,
    Null,
    Top,
    Fld,
    NewO,
    NewF,
    NewM,
    Invk,
    AssF,
    AssP,
    Join,
    Sub,
    SubsType,
}

impl Rule {
    pub const ALL: [Rule; 13] = [
        Rule::Var,
        Rule::Null,
        Rule::Top,
        Rule::Fld,
        Rule::NewO,
        Rule::NewF,
        Rule::NewM,
        Rule::Invk,
        Rule::AssF,
        Rule::AssP,
        Rule::Join,
        Rule::Sub,
        Rule::SubsType,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Var => "p-var",
            Rule::Null => "p-null",
            Rule::Top => "p-top",
            Rule::Fld => "p-fld",
            Rule::NewO => "p-newO",
            Rule::NewF => "p-newF",
            Rule::NewM => "p-newM",
            Rule::Invk => "p-invk",
            Rule::AssF => "p-assF",
            Rule::AssP => "p-assP",
            Rule::Join => "p-join",
            Rule::Sub => "p-sub",
            Rule::SubsType => "p-subs-type",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A derivation of `env ⊢ expr : class : predicate`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub rule: Rule,
    pub env: Rc<PredEnv>,
    pub expr: Expr,
    pub class: Name,
    pub predicate: Predicate,
    pub premises: Vec<Rc<Derivation>>,
}

impl Derivation {
    pub fn conclusion(&self) -> String {
        format!("{} |- {} : {} : {}", self.env, self.expr, self.class, self.predicate)
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(|p| p.size()).sum::<usize>()
    }

    pub fn height(&self) -> usize {
        1 + self.premises.iter().map(|p| p.height()).max().unwrap_or(0)
    }

    /// All nodes, root first.
    pub fn nodes(&self) -> Vec<&Derivation> {
        let mut out = vec![self];
        let mut i = 0;
        while i < out.len() {
            out.extend(out[i].premises.iter().map(|p| &**p));
            i += 1;
        }
        out
    }

    pub fn rules(&self) -> Vec<Rule> {
        self.nodes().iter().map(|n| n.rule).collect()
    }

    pub fn leaf_rules(&self) -> Vec<Rule> {
        self.nodes().iter().filter(|n| n.premises.is_empty()).map(|n| n.rule).collect()
    }

    /// Indented tree: one node per line, premises two spaces deeper.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_text(&mut out, 0);
        out
    }

    fn write_text(&self, out: &mut String, indent: usize) {
        let _ = writeln!(out, "{:indent$}{}: {}", "", self.rule, self.conclusion(), indent = indent);
        for p in &self.premises {
            p.write_text(out, indent + 2);
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "rule": self.rule.name(),
            "env": self.env.to_string(),
            "expr": self.expr.to_string(),
            "class": &*self.class,
            "predicate": self.predicate.to_string(),
            "premises": self.premises.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayError {
    pub rule: Rule,
    pub conclusion: String,
    pub message: String,
}

impl fmt::Display for ReplayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.rule, self.conclusion, self.message)
    }
}

/// Checks every node of `d` against the rule it names. Also checks that each
/// environment is well formed, that every predicate lies in the language of
/// its class and that the erased judgement types.
pub fn replay(ec: &ExecutionContext, d: &Derivation) -> Result<(), ReplayError> {
    for node in d.nodes() {
        check_node(ec, node).map_err(|message| ReplayError {
            rule: node.rule,
            conclusion: node.conclusion(),
            message,
        })?;
    }
    Ok(())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn arity(d: &Derivation, n: usize) -> Result<(), String> {
    ensure(d.premises.len() == n, || format!("expected {n} premises, found {}", d.premises.len()))
}

fn same_env(d: &Derivation, p: &Derivation) -> Result<(), String> {
    ensure(d.env == p.env, || "premise environment differs".into())
}

fn premise_is(p: &Derivation, expr: &Expr, class: &str, pred: &Predicate) -> Result<(), String> {
    ensure(p.expr == *expr && &*p.class == class && p.predicate == *pred, || {
        format!("premise should conclude {expr} : {class} : {pred}, found {}", p.conclusion())
    })
}

fn single_entry(p: &Predicate) -> Option<&Entry> {
    match p.entries() {
        [e] => Some(e),
        _ => None,
    }
}

fn check_node(ec: &ExecutionContext, d: &Derivation) -> Result<(), String> {
    check_env(ec, &d.env).map_err(|vs| format!("ill-formed environment: {}", vs[0]))?;
    ensure(in_language(ec, &d.class, &d.predicate).unwrap_or(false), || {
        format!("{} is not in the language of {}", d.predicate, d.class)
    })?;
    let tc = TypeChecker::new(ec);
    ensure(tc.check_type(&d.env.erase(), &d.expr, &d.class).unwrap_or(false), || {
        format!("{} does not have type {}", d.expr, d.class)
    })?;
    match d.rule {
        Rule::Top => {
            arity(d, 0)?;
            ensure(d.predicate == Predicate::Top, || "conclusion must be top".into())
        }
        Rule::Var => {
            arity(d, 0)?;
            let Expr::Var(x) = &d.expr else { return Err("not a variable".into()) };
            let stmt = Statement { var: x.clone(), class: d.class.clone(), pred: d.predicate.clone() };
            ensure(d.env.statements().contains(&stmt), || "statement not in the environment".into())
        }
        Rule::Null => {
            arity(d, 0)?;
            ensure(d.expr == Expr::Null && d.predicate == Predicate::Nil, || "expected null : nn".into())
        }
        Rule::NewO => {
            arity(d, 0)?;
            ensure(matches!(&d.expr, Expr::New(c, _) if *c == d.class), || {
                "expected an object creation of the class".into()
            })?;
            ensure(d.predicate == Predicate::empty(), || "conclusion must be <>".into())
        }
        Rule::Fld => {
            arity(d, 1)?;
            let Expr::Field(r, f) = &d.expr else { return Err("not a field access".into()) };
            let p = &d.premises[0];
            same_env(d, p)?;
            premise_is(p, r, &p.class, &Predicate::field(f, d.predicate.clone()))?;
            ensure(ec.field_type(&p.class, f).ok().as_ref() == Some(&d.class), || "field type mismatch".into())
        }
        Rule::NewF => {
            arity(d, 1)?;
            let Expr::New(c, args) = &d.expr else { return Err("not an object creation".into()) };
            ensure(*c == d.class, || "class mismatch".into())?;
            let entry = single_entry(&d.predicate).ok_or("expected a singleton")?;
            let Member::Value(sigma) = &entry.member else { return Err("expected a field entry".into()) };
            let fields = ec.fields_of(c).map_err(|e| e.to_string())?;
            let i = fields.iter().position(|f| *f == entry.label).ok_or("unknown field")?;
            ensure(args.len() == fields.len(), || "constructor arity".into())?;
            let p = &d.premises[0];
            same_env(d, p)?;
            let ty = ec.field_type(c, &entry.label).map_err(|e| e.to_string())?;
            premise_is(p, &args[i], &ty, sigma)
        }
        Rule::NewM => {
            arity(d, 1)?;
            let Expr::New(c, _) = &d.expr else { return Err("not an object creation".into()) };
            ensure(*c == d.class, || "class mismatch".into())?;
            let entry = single_entry(&d.predicate).ok_or("expected a singleton")?;
            let Member::Method { this, args, result } = &entry.member else {
                return Err("expected a method entry".into());
            };
            let body = ec.method_body(c, &entry.label).map_err(|e| e.to_string())?;
            let sig = ec.method_type(c, &entry.label).map_err(|e| e.to_string())?;
            ensure(sig.params.len() == args.len(), || "method arity".into())?;
            let inner = method_env(c, this, &body.params(), &sig.params, args);
            let p = &d.premises[0];
            ensure(*p.env == inner, || format!("body environment should be {inner}"))?;
            premise_is(p, body.body(), &sig.ret, result)
        }
        Rule::Invk => {
            let Expr::Invoke(r, m, es) = &d.expr else { return Err("not an invocation".into()) };
            arity(d, es.len() + 2)?;
            d.premises.iter().try_for_each(|p| same_env(d, p))?;
            let recv_class = d.premises[0].class.clone();
            let sig = ec.method_type(&recv_class, m).map_err(|e| e.to_string())?;
            ensure(sig.ret == d.class, || "result type mismatch".into())?;
            let entry = single_entry(&d.premises[0].predicate).ok_or("expected a method singleton")?;
            let Member::Method { this, args, result } = &entry.member else {
                return Err("expected a method entry".into());
            };
            ensure(entry.label == *m && *result == d.predicate && args.len() == es.len(), || {
                "method predicate does not match the invocation".into()
            })?;
            premise_is(&d.premises[0], r, &recv_class, &d.premises[0].predicate)?;
            premise_is(&d.premises[1], r, &recv_class, this)?;
            for (i, (e, psi)) in es.iter().zip(args).enumerate() {
                premise_is(&d.premises[i + 2], e, &sig.params[i], psi)?;
            }
            Ok(())
        }
        Rule::AssF => {
            arity(d, 2)?;
            let Expr::Assign(r, f, v) = &d.expr else { return Err("not an assignment".into()) };
            let entry = single_entry(&d.predicate).ok_or("expected a singleton")?;
            let Member::Value(sigma) = &entry.member else { return Err("expected a field entry".into()) };
            ensure(entry.label == *f, || "label differs from the assigned field".into())?;
            let (pr, pv) = (&d.premises[0], &d.premises[1]);
            same_env(d, pr)?;
            same_env(d, pv)?;
            ensure(pr.expr == **r && pr.class == d.class && pr.predicate.is_object(), || {
                "receiver premise must give an object predicate at the same class".into()
            })?;
            let ty = ec.field_type(&d.class, f).map_err(|e| e.to_string())?;
            premise_is(pv, v, &ty, sigma)
        }
        Rule::AssP => {
            arity(d, 1)?;
            let Expr::Assign(r, f, _) = &d.expr else { return Err("not an assignment".into()) };
            let entry = single_entry(&d.predicate).ok_or("expected a singleton")?;
            ensure(entry.label != *f, || "label must differ from the assigned field".into())?;
            same_env(d, &d.premises[0])?;
            premise_is(&d.premises[0], r, &d.class, &d.predicate)
        }
        Rule::Join => {
            ensure(!d.premises.is_empty(), || "join needs at least one premise".into())?;
            for p in &d.premises {
                same_env(d, p)?;
                ensure(p.expr == d.expr && p.class == d.class && p.predicate.is_object(), || {
                    "join premises must be object predicates of the same judgement".into()
                })?;
            }
            let joined = super::relation::join_all(d.premises.iter().map(|p| &p.predicate));
            ensure(joined == d.predicate, || format!("join of premises is {joined}"))
        }
        Rule::Sub => {
            arity(d, 1)?;
            let p = &d.premises[0];
            same_env(d, p)?;
            ensure(p.expr == d.expr && p.class == d.class, || "premise judges a different term".into())?;
            ensure(subpredicate(&p.predicate, &d.predicate), || {
                format!("{} is not a subpredicate of {}", p.predicate, d.predicate)
            })
        }
        Rule::SubsType => {
            arity(d, 1)?;
            let p = &d.premises[0];
            same_env(d, p)?;
            ensure(p.expr == d.expr && p.predicate == d.predicate, || "premise judges a different term".into())?;
            ensure(ec.subtype(&p.class, &d.class).unwrap_or(false), || {
                format!("{} is not a subclass of {}", p.class, d.class)
            })
        }
    }
}

/// `{this: C: φ, x1: D1: ψ1, ...}`.
pub fn method_env(class: &Name, this: &Predicate, params: &[Name], types: &[Name], args: &[Predicate]) -> PredEnv {
    let mut env = PredEnv::new();
    env.push(Statement { var: Name::from(THIS), class: class.clone(), pred: this.clone() });
    for ((x, ty), psi) in params.iter().zip(types).zip(args) {
        env.push(Statement { var: x.clone(), class: ty.clone(), pred: psi.clone() });
    }
    env
}
