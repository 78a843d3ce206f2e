//! Abstract syntax of pFJ programs, approximate expressions and predicates.

use std::collections::HashMap;
use std::sync::Arc;

/// Identifier for classes, fields, methods and variables.
pub type Name = Arc<str>;

pub const OBJECT: &str = "Object";
pub const THIS: &str = "this";

/// Words that can never be used as identifiers.
pub const RESERVED: &[&str] = &["class", "extends", "new", "null", "this", "omega"];

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// A pFJ expression. `Omega` only occurs in approximate expressions; the
/// program parser never produces it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Var(Name),
    Null,
    Field(Box<Expr>, Name),
    Assign(Box<Expr>, Name, Box<Expr>),
    Invoke(Box<Expr>, Name, Vec<Expr>),
    New(Name, Vec<Expr>),
    Omega,
}

impl Expr {
    pub fn var(x: &str) -> Expr {
        Expr::Var(name(x))
    }

    pub fn this() -> Expr {
        Expr::Var(name(THIS))
    }

    pub fn new_object(class: &str, args: Vec<Expr>) -> Expr {
        Expr::New(name(class), args)
    }

    pub fn field(self, f: &str) -> Expr {
        Expr::Field(Box::new(self), name(f))
    }

    pub fn assign(self, f: &str, value: Expr) -> Expr {
        Expr::Assign(Box::new(self), name(f), Box::new(value))
    }

    pub fn invoke(self, m: &str, args: Vec<Expr>) -> Expr {
        Expr::Invoke(Box::new(self), name(m), args)
    }

    /// Receiver of a member operation (field access, assignment or invocation).
    pub fn receiver(&self) -> Option<&Expr> {
        match self {
            Expr::Field(r, _) | Expr::Assign(r, _, _) | Expr::Invoke(r, _, _) => Some(r),
            _ => None,
        }
    }

    pub fn is_new(&self) -> bool {
        matches!(self, Expr::New(..))
    }

    pub fn contains_omega(&self) -> bool {
        match self {
            Expr::Omega => true,
            Expr::Var(_) | Expr::Null => false,
            Expr::Field(r, _) => r.contains_omega(),
            Expr::Assign(r, _, v) => r.contains_omega() || v.contains_omega(),
            Expr::Invoke(r, _, args) => r.contains_omega() || args.iter().any(Expr::contains_omega),
            Expr::New(_, args) => args.iter().any(Expr::contains_omega),
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Null | Expr::Omega => 1,
            Expr::Field(r, _) => 1 + r.size(),
            Expr::Assign(r, _, v) => 1 + r.size() + v.size(),
            Expr::Invoke(r, _, args) => 1 + r.size() + args.iter().map(Expr::size).sum::<usize>(),
            Expr::New(_, args) => 1 + args.iter().map(Expr::size).sum::<usize>(),
        }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            Expr::Var(_) => false,
            Expr::Null | Expr::Omega => true,
            Expr::Field(r, _) => r.is_closed(),
            Expr::Assign(r, _, v) => r.is_closed() && v.is_closed(),
            Expr::Invoke(r, _, args) => r.is_closed() && args.iter().all(Expr::is_closed),
            Expr::New(_, args) => args.iter().all(Expr::is_closed),
        }
    }

    /// Simultaneous substitution of variables. Images are never revisited.
    pub fn substitute(&self, bindings: &HashMap<Name, Expr>) -> Expr {
        match self {
            Expr::Var(x) => bindings.get(x).cloned().unwrap_or_else(|| self.clone()),
            Expr::Null | Expr::Omega => self.clone(),
            Expr::Field(r, f) => Expr::Field(Box::new(r.substitute(bindings)), f.clone()),
            Expr::Assign(r, f, v) => {
                Expr::Assign(Box::new(r.substitute(bindings)), f.clone(), Box::new(v.substitute(bindings)))
            }
            Expr::Invoke(r, m, args) => Expr::Invoke(
                Box::new(r.substitute(bindings)),
                m.clone(),
                args.iter().map(|a| a.substitute(bindings)).collect(),
            ),
            Expr::New(c, args) => Expr::New(c.clone(), args.iter().map(|a| a.substitute(bindings)).collect()),
        }
    }
}

pub fn substitute(e: &Expr, bindings: &HashMap<Name, Expr>) -> Expr {
    e.substitute(bindings)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldDecl {
    pub ty: Name,
    pub name: Name,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Param {
    pub ty: Name,
    pub name: Name,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MethodDecl {
    pub return_type: Name,
    pub name: Name,
    pub params: Vec<Param>,
    pub body: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassDecl {
    pub name: Name,
    pub superclass: Name,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<MethodDecl>,
}

impl ClassDecl {
    pub fn field(&self, f: &str) -> Option<&FieldDecl> {
        self.fields.iter().find(|fd| &*fd.name == f)
    }

    pub fn method(&self, m: &str) -> Option<&MethodDecl> {
        self.methods.iter().find(|md| &*md.name == m)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub classes: Vec<ClassDecl>,
    pub main: Expr,
}

/// Behavioural predicates: `top`, `nn` (null) and object predicates.
///
/// Field entries carry normal predicates and method results are normal; the
/// parser and [`Predicate::is_valid`] enforce this. Labels may repeat.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Predicate {
    Top,
    Nil,
    Object(Vec<Entry>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Entry {
    pub label: Name,
    pub member: Member,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Member {
    /// Behaviour of a field: a normal predicate.
    Value(Predicate),
    /// Method behaviour: required self predicate, argument predicates and
    /// the normal predicate of the result.
    Method { this: Predicate, args: Vec<Predicate>, result: Predicate },
}

impl Predicate {
    pub fn empty() -> Predicate {
        Predicate::Object(Vec::new())
    }

    pub fn field(label: &str, value: Predicate) -> Predicate {
        Predicate::Object(vec![Entry { label: name(label), member: Member::Value(value) }])
    }

    pub fn method(label: &str, this: Predicate, args: Vec<Predicate>, result: Predicate) -> Predicate {
        Predicate::Object(vec![Entry { label: name(label), member: Member::Method { this, args, result } }])
    }

    pub fn singleton(entry: Entry) -> Predicate {
        Predicate::Object(vec![entry])
    }

    pub fn is_normal(&self) -> bool {
        !matches!(self, Predicate::Top)
    }

    pub fn is_object(&self) -> bool {
        matches!(self, Predicate::Object(_))
    }

    pub fn entries(&self) -> &[Entry] {
        match self {
            Predicate::Object(es) => es,
            _ => &[],
        }
    }

    /// Number of entries of a top-level object predicate (0 otherwise).
    pub fn width(&self) -> usize {
        self.entries().len()
    }

    /// Structural depth: atoms are 0, an entry adds one level over its parts.
    pub fn depth(&self) -> usize {
        self.entries().iter().map(Entry::depth).max().unwrap_or(0)
    }

    /// Largest object width occurring strictly inside member predicates.
    pub fn nested_width(&self) -> usize {
        self.entries()
            .iter()
            .map(|e| match &e.member {
                Member::Value(p) => p.width().max(p.nested_width()),
                Member::Method { this, args, result } => std::iter::once(this)
                    .chain(args)
                    .chain(std::iter::once(result))
                    .map(|p| p.width().max(p.nested_width()))
                    .max()
                    .unwrap_or(0),
            })
            .max()
            .unwrap_or(0)
    }

    /// Field members and method results are normal, at every level.
    pub fn is_valid(&self) -> bool {
        self.entries().iter().all(|e| match &e.member {
            Member::Value(p) => p.is_normal() && p.is_valid(),
            Member::Method { this, args, result } => {
                result.is_normal() && this.is_valid() && args.iter().all(Predicate::is_valid) && result.is_valid()
            }
        })
    }

    /// Stable sort of entries by label at every level, keeping duplicates.
    pub fn canonical(&self) -> Predicate {
        match self {
            Predicate::Object(es) => {
                let mut es: Vec<Entry> = es.iter().map(Entry::canonical).collect();
                es.sort_by(|a, b| a.label.cmp(&b.label));
                Predicate::Object(es)
            }
            p => p.clone(),
        }
    }
}

impl Entry {
    pub fn depth(&self) -> usize {
        1 + match &self.member {
            Member::Value(p) => p.depth(),
            Member::Method { this, args, result } => std::iter::once(this)
                .chain(args)
                .chain(std::iter::once(result))
                .map(Predicate::depth)
                .max()
                .unwrap_or(0),
        }
    }

    pub fn is_method(&self) -> bool {
        matches!(self.member, Member::Method { .. })
    }

    fn canonical(&self) -> Entry {
        let member = match &self.member {
            Member::Value(p) => Member::Value(p.canonical()),
            Member::Method { this, args, result } => Member::Method {
                this: this.canonical(),
                args: args.iter().map(Predicate::canonical).collect(),
                result: result.canonical(),
            },
        };
        Entry { label: self.label.clone(), member }
    }
}
