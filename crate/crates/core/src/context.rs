//! Execution contexts: lookup functions, subtyping and well-formedness.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::syntax::{ClassDecl, Expr, FieldDecl, MethodDecl, Name, OBJECT, THIS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LookupError {
    #[error("unknown class `{0}`")]
    UnknownClass(Name),
    #[error("class `{class}` has no field `{field}`")]
    UnknownField { class: Name, field: Name },
    #[error("class `{class}` has no method `{method}`")]
    UnknownMethod { class: Name, method: Name },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodSig {
    pub params: Vec<Name>,
    pub ret: Name,
}

/// The most-derived definition of a method along a superclass chain.
#[derive(Debug, Clone, Copy)]
pub struct MethodBody<'a> {
    pub declaring_class: &'a Name,
    pub decl: &'a MethodDecl,
}

impl MethodBody<'_> {
    pub fn params(&self) -> Vec<Name> {
        self.decl.params.iter().map(|p| p.name.clone()).collect()
    }

    pub fn body(&self) -> &Expr {
        &self.decl.body
    }
}

/// Which of the six well-formedness conditions a violation breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    UniqueNames,
    Acyclic,
    NoFieldRedeclaration,
    OverrideSignature,
    ParameterNames,
    ValidTypes,
}

impl Condition {
    pub fn numeral(self) -> &'static str {
        match self {
            Condition::UniqueNames => "i",
            Condition::Acyclic => "ii",
            Condition::NoFieldRedeclaration => "iii",
            Condition::OverrideSignature => "iv",
            Condition::ParameterNames => "v",
            Condition::ValidTypes => "vi",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub condition: Condition,
    pub class: Name,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "condition ({}) in class {}: {}", self.condition.numeral(), self.class, self.message)
    }
}

/// An ordered sequence of class declarations with a name index.
#[derive(Debug, Clone, Default)]
pub struct ExecutionContext {
    classes: Vec<ClassDecl>,
    index: HashMap<Name, usize>,
}

impl ExecutionContext {
    pub fn new(classes: Vec<ClassDecl>) -> ExecutionContext {
        let mut index = HashMap::new();
        for (i, c) in classes.iter().enumerate() {
            index.entry(c.name.clone()).or_insert(i);
        }
        ExecutionContext { classes, index }
    }

    pub fn classes(&self) -> &[ClassDecl] {
        &self.classes
    }

    pub fn class(&self, c: &str) -> Option<&ClassDecl> {
        self.index.get(c).map(|&i| &self.classes[i])
    }

    pub fn is_valid(&self, c: &str) -> bool {
        c == OBJECT || self.index.contains_key(c)
    }

    /// `Object` followed by every declared class, in declaration order.
    pub fn valid_classes(&self) -> Vec<Name> {
        let mut out = vec![Name::from(OBJECT)];
        out.extend(self.classes.iter().map(|c| c.name.clone()));
        out.dedup();
        out
    }

    fn check_valid(&self, c: &str) -> Result<(), LookupError> {
        if self.is_valid(c) {
            Ok(())
        } else {
            Err(LookupError::UnknownClass(Name::from(c)))
        }
    }

    /// Declarations from `c` up to (excluding) `Object`. Stops early on a
    /// cycle or an undeclared superclass so ill-formed contexts never loop.
    pub fn ancestry(&self, c: &str) -> Result<Vec<&ClassDecl>, LookupError> {
        self.check_valid(c)?;
        let mut chain = Vec::new();
        let mut seen = HashSet::new();
        let mut cur = self.class(c);
        while let Some(decl) = cur {
            if !seen.insert(&decl.name) {
                break;
            }
            chain.push(decl);
            cur = self.class(&decl.superclass);
        }
        Ok(chain)
    }

    /// Field declarations of `c`, inherited ones first.
    pub fn fields(&self, c: &str) -> Result<Vec<&FieldDecl>, LookupError> {
        let chain = self.ancestry(c)?;
        Ok(chain.iter().rev().flat_map(|d| d.fields.iter()).collect())
    }

    pub fn fields_of(&self, c: &str) -> Result<Vec<Name>, LookupError> {
        Ok(self.fields(c)?.into_iter().map(|f| f.name.clone()).collect())
    }

    pub fn field_type(&self, c: &str, f: &str) -> Result<Name, LookupError> {
        self.ancestry(c)?
            .into_iter()
            .find_map(|d| d.field(f))
            .map(|fd| fd.ty.clone())
            .ok_or_else(|| LookupError::UnknownField { class: Name::from(c), field: Name::from(f) })
    }

    fn find_method(&self, c: &str, m: &str) -> Result<MethodBody<'_>, LookupError> {
        self.ancestry(c)?
            .into_iter()
            .find_map(|d| d.method(m).map(|decl| MethodBody { declaring_class: &d.name, decl }))
            .ok_or_else(|| LookupError::UnknownMethod { class: Name::from(c), method: Name::from(m) })
    }

    pub fn method_type(&self, c: &str, m: &str) -> Result<MethodSig, LookupError> {
        let found = self.find_method(c, m)?;
        Ok(MethodSig {
            params: found.decl.params.iter().map(|p| p.ty.clone()).collect(),
            ret: found.decl.return_type.clone(),
        })
    }

    pub fn method_body(&self, c: &str, m: &str) -> Result<MethodBody<'_>, LookupError> {
        self.find_method(c, m)
    }

    /// Names of the methods visible in `c`, topmost declarations first.
    pub fn method_names(&self, c: &str) -> Result<Vec<Name>, LookupError> {
        let mut out: Vec<Name> = Vec::new();
        for d in self.ancestry(c)?.iter().rev() {
            for md in &d.methods {
                if !out.contains(&md.name) {
                    out.push(md.name.clone());
                }
            }
        }
        Ok(out)
    }

    /// Reflexive-transitive closure of `extends`.
    pub fn subtype(&self, c: &str, d: &str) -> Result<bool, LookupError> {
        self.check_valid(c)?;
        self.check_valid(d)?;
        if c == d || d == OBJECT {
            return Ok(true);
        }
        Ok(self.ancestry(c)?.iter().any(|decl| &*decl.superclass == d))
    }

    pub fn check_wellformed(&self) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        let mut push =
            |condition, class: &Name, message: String| out.push(Violation { condition, class: class.clone(), message });

        let mut seen = HashSet::new();
        for c in &self.classes {
            if &*c.name == OBJECT {
                push(Condition::UniqueNames, &c.name, "a class may not be named Object".into());
            } else if !seen.insert(&c.name) {
                push(Condition::UniqueNames, &c.name, format!("class {} is declared more than once", c.name));
            }
        }

        let mut cyclic = HashSet::new();
        for c in &self.classes {
            let mut visited = HashSet::new();
            let mut cur = Some(c);
            while let Some(d) = cur {
                if !visited.insert(&d.name) {
                    if d.name == c.name {
                        cyclic.insert(c.name.clone());
                        push(Condition::Acyclic, &c.name, format!("class {} inherits from itself", c.name));
                    }
                    break;
                }
                cur = self.class(&d.superclass);
            }
        }

        for c in &self.classes {
            if !self.is_valid(&c.superclass) {
                push(Condition::ValidTypes, &c.name, format!("superclass {} is not a valid class", c.superclass));
            }
            for fd in &c.fields {
                if !self.is_valid(&fd.ty) {
                    push(Condition::ValidTypes, &c.name, format!("field {} has unknown type {}", fd.name, fd.ty));
                }
            }
            for md in &c.methods {
                if !self.is_valid(&md.return_type) {
                    push(
                        Condition::ValidTypes,
                        &c.name,
                        format!("method {} returns unknown type {}", md.name, md.return_type),
                    );
                }
                for p in &md.params {
                    if !self.is_valid(&p.ty) {
                        push(
                            Condition::ValidTypes,
                            &c.name,
                            format!("parameter {} of {} has unknown type {}", p.name, md.name, p.ty),
                        );
                    }
                }
                let mut names = HashSet::new();
                for p in &md.params {
                    if &*p.name == THIS {
                        push(
                            Condition::ParameterNames,
                            &c.name,
                            format!("method {} uses `this` as a parameter", md.name),
                        );
                    } else if !names.insert(&p.name) {
                        push(
                            Condition::ParameterNames,
                            &c.name,
                            format!("method {} repeats parameter {}", md.name, p.name),
                        );
                    }
                }
            }
            if cyclic.contains(&c.name) {
                continue;
            }

            let inherited: Vec<&ClassDecl> =
                self.ancestry(&c.name).map(|chain| chain.into_iter().skip(1).collect()).unwrap_or_default();
            let mut own = HashSet::new();
            for fd in &c.fields {
                if !own.insert(&fd.name) {
                    push(Condition::NoFieldRedeclaration, &c.name, format!("field {} is declared twice", fd.name));
                } else if let Some(sup) = inherited.iter().find(|d| d.field(&fd.name).is_some()) {
                    push(
                        Condition::NoFieldRedeclaration,
                        &c.name,
                        format!("field {} is already inherited from {}", fd.name, sup.name),
                    );
                }
            }
            let mut own = HashSet::new();
            for md in &c.methods {
                if !own.insert(&md.name) {
                    push(Condition::OverrideSignature, &c.name, format!("method {} is declared twice", md.name));
                    continue;
                }
                if let Some(sup) = inherited.iter().find_map(|d| d.method(&md.name)) {
                    let same = sup.return_type == md.return_type
                        && sup.params.len() == md.params.len()
                        && sup.params.iter().zip(&md.params).all(|(a, b)| a.ty == b.ty);
                    if !same {
                        push(
                            Condition::OverrideSignature,
                            &c.name,
                            format!("method {} overrides an inherited method with a different signature", md.name),
                        );
                    }
                }
            }
        }

        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }
}
