//! Nominal type assignment with null typing, field-assignment typing and
//! subsumption.
//!
//! Typing is computed as a set of candidate types that is kept as an
//! antichain under subtyping. For ordinary expressions the set is a single
//! class: the minimal type. A member operation on a `null` (or omega)
//! receiver can be resolved against any class that has the member, which is
//! where several incomparable candidates come from. `check_type` accepts when
//! any candidate is a subtype of the requested class.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::context::{ExecutionContext, LookupError};
use crate::syntax::{Expr, Name, THIS};

/// A type environment `x: C`.
pub type TypeEnv = BTreeMap<Name, Name>;

/// Result type of an expression: a class, or the internal bottom types of
/// `null` and omega.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ty {
    Class(Name),
    Null,
    Omega,
}

impl Ty {
    pub fn class(&self) -> Option<&Name> {
        match self {
            Ty::Class(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_bottom(&self) -> bool {
        !matches!(self, Ty::Class(_))
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Class(c) => f.write_str(c),
            Ty::Null => f.write_str("<null>"),
            Ty::Omega => f.write_str("<omega>"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("type error in `{expr}`: {message}")]
pub struct TypeError {
    pub expr: String,
    pub message: String,
}

impl TypeError {
    fn new(e: &Expr, message: impl Into<String>) -> TypeError {
        TypeError { expr: e.to_string(), message: message.into() }
    }

    fn lookup(e: &Expr, err: LookupError) -> TypeError {
        TypeError::new(e, err.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodTypeViolation {
    pub class: Name,
    pub method: Name,
    pub message: String,
}

impl fmt::Display for MethodTypeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "method {}.{}: {}", self.class, self.method, self.message)
    }
}

pub struct TypeChecker<'a> {
    ec: &'a ExecutionContext,
}

impl<'a> TypeChecker<'a> {
    pub fn new(ec: &'a ExecutionContext) -> TypeChecker<'a> {
        TypeChecker { ec }
    }

    pub fn subtype(&self, t: &Ty, c: &str) -> bool {
        match t {
            Ty::Class(d) => self.ec.subtype(d, c).unwrap_or(false),
            Ty::Null | Ty::Omega => self.ec.is_valid(c),
        }
    }

    fn fits(&self, candidates: &[Ty], c: &str) -> bool {
        candidates.iter().any(|t| self.subtype(t, c))
    }

    /// Classes a receiver may be viewed at. Bottom receivers resolve against
    /// every valid class.
    fn receiver_classes(&self, candidates: &[Ty]) -> Vec<Name> {
        if candidates.iter().any(Ty::is_bottom) {
            self.ec.valid_classes()
        } else {
            candidates.iter().filter_map(|t| t.class().cloned()).collect()
        }
    }

    fn prune(&self, mut tys: Vec<Ty>) -> Vec<Ty> {
        tys.sort();
        tys.dedup();
        let keep: Vec<bool> = tys
            .iter()
            .map(|t| {
                !tys.iter().any(|u| {
                    u != t
                        && match t {
                            Ty::Class(c) => self.subtype(u, c),
                            _ => false,
                        }
                })
            })
            .collect();
        tys.into_iter().zip(keep).filter_map(|(t, k)| k.then_some(t)).collect()
    }

    /// The antichain of candidate types for `e`; never empty on success.
    pub fn types_of(&self, env: &TypeEnv, e: &Expr) -> Result<Vec<Ty>, TypeError> {
        match e {
            Expr::Var(x) => env
                .get(x)
                .map(|c| vec![Ty::Class(c.clone())])
                .ok_or_else(|| TypeError::new(e, format!("unbound variable `{x}`"))),
            Expr::Null => Ok(vec![Ty::Null]),
            Expr::Omega => Ok(vec![Ty::Omega]),
            Expr::New(c, args) => {
                let fields = self.ec.fields(c).map_err(|err| TypeError::lookup(e, err))?;
                if fields.len() != args.len() {
                    return Err(TypeError::new(
                        e,
                        format!("class {c} has {} fields but {} arguments were given", fields.len(), args.len()),
                    ));
                }
                for (fd, arg) in fields.iter().zip(args) {
                    let at = self.types_of(env, arg)?;
                    if !self.fits(&at, &fd.ty) {
                        return Err(TypeError::new(
                            arg,
                            format!("argument for field {} must have type {}", fd.name, fd.ty),
                        ));
                    }
                }
                Ok(vec![Ty::Class(c.clone())])
            }
            Expr::Field(r, f) => {
                let rt = self.types_of(env, r)?;
                let out: Vec<Ty> = self
                    .receiver_classes(&rt)
                    .iter()
                    .filter_map(|c| self.ec.field_type(c, f).ok())
                    .map(Ty::Class)
                    .collect();
                if out.is_empty() {
                    return Err(self.member_error(e, &rt, "field", f));
                }
                Ok(self.prune(out))
            }
            Expr::Assign(r, f, v) => {
                let rt = self.types_of(env, r)?;
                let vt = self.types_of(env, v)?;
                let mut visible = false;
                let mut out = Vec::new();
                for c in self.receiver_classes(&rt) {
                    if let Ok(d) = self.ec.field_type(&c, f) {
                        visible = true;
                        if self.fits(&vt, &d) {
                            out.push(Ty::Class(c));
                        }
                    }
                }
                if !visible {
                    return Err(self.member_error(e, &rt, "field", f));
                }
                if out.is_empty() {
                    return Err(TypeError::new(e, format!("assigned value does not match the type of field {f}")));
                }
                Ok(self.prune(out))
            }
            Expr::Invoke(r, m, args) => {
                let rt = self.types_of(env, r)?;
                let ats = args.iter().map(|a| self.types_of(env, a)).collect::<Result<Vec<_>, _>>()?;
                let mut visible = false;
                let mut out = Vec::new();
                for c in self.receiver_classes(&rt) {
                    if let Ok(sig) = self.ec.method_type(&c, m) {
                        visible = true;
                        if sig.params.len() == ats.len() && sig.params.iter().zip(&ats).all(|(p, at)| self.fits(at, p))
                        {
                            out.push(Ty::Class(sig.ret));
                        }
                    }
                }
                if !visible {
                    return Err(self.member_error(e, &rt, "method", m));
                }
                if out.is_empty() {
                    return Err(TypeError::new(e, format!("arguments do not match the signature of {m}")));
                }
                Ok(self.prune(out))
            }
        }
    }

    fn member_error(&self, e: &Expr, rt: &[Ty], kind: &str, member: &str) -> TypeError {
        if rt.iter().any(Ty::is_bottom) {
            TypeError::new(e, format!("no class declares a {kind} `{member}`"))
        } else {
            let tys: Vec<String> = rt.iter().map(Ty::to_string).collect();
            TypeError::new(e, format!("type {} has no {kind} `{member}`", tys.join(" | ")))
        }
    }

    pub fn min_type(&self, env: &TypeEnv, e: &Expr) -> Result<Ty, TypeError> {
        let mut tys = self.types_of(env, e)?;
        if tys.len() == 1 {
            Ok(tys.pop().unwrap())
        } else {
            let alts: Vec<String> = tys.iter().map(Ty::to_string).collect();
            Err(TypeError::new(e, format!("ambiguous null receiver: could be typed at {}", alts.join(", "))))
        }
    }

    pub fn check_type(&self, env: &TypeEnv, e: &Expr, c: &str) -> Result<bool, TypeError> {
        if !self.ec.is_valid(c) {
            return Err(TypeError::new(e, format!("unknown class `{c}`")));
        }
        Ok(self.fits(&self.types_of(env, e)?, c))
    }

    pub fn check_env(&self, env: &TypeEnv) -> Result<(), TypeError> {
        for (x, c) in env {
            if !self.ec.is_valid(c) {
                return Err(TypeError { expr: x.to_string(), message: format!("unknown class `{c}` in environment") });
            }
        }
        Ok(())
    }
}

pub fn min_type(ec: &ExecutionContext, env: &TypeEnv, e: &Expr) -> Result<Ty, TypeError> {
    TypeChecker::new(ec).min_type(env, e)
}

pub fn check_type(ec: &ExecutionContext, env: &TypeEnv, e: &Expr, c: &str) -> Result<bool, TypeError> {
    TypeChecker::new(ec).check_type(env, e, c)
}

impl ExecutionContext {
    /// Every method body checks against its declared return type under
    /// `this: C` and its parameter types.
    pub fn check_type_consistent(&self) -> Result<(), Vec<MethodTypeViolation>> {
        let tc = TypeChecker::new(self);
        let mut out = Vec::new();
        for class in self.classes() {
            for md in &class.methods {
                let mut env = TypeEnv::new();
                env.insert(Name::from(THIS), class.name.clone());
                for p in &md.params {
                    env.insert(p.name.clone(), p.ty.clone());
                }
                let message = match tc.check_type(&env, &md.body, &md.return_type) {
                    Ok(true) => continue,
                    Ok(false) => match tc.types_of(&env, &md.body) {
                        Ok(tys) => {
                            let tys: Vec<String> = tys.iter().map(Ty::to_string).collect();
                            format!("body has type {} but {} is declared", tys.join(" | "), md.return_type)
                        }
                        Err(err) => err.to_string(),
                    },
                    Err(err) => err.to_string(),
                };
                out.push(MethodTypeViolation { class: class.name.clone(), method: md.name.clone(), message });
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }
}
