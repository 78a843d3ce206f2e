//! Concrete-syntax rendering. Everything printed here reparses to an equal value.

use std::fmt::{self, Display, Formatter, Write};

use crate::syntax::{ClassDecl, Entry, Expr, Member, Predicate, Program};

fn write_receiver(f: &mut Formatter<'_>, r: &Expr) -> fmt::Result {
    match r {
        // `new C(..).f` parses fine, but the parenthesised form reads better;
        // assignments must be parenthesised since they bind loosest.
        Expr::New(..) | Expr::Assign(..) => write!(f, "({r})"),
        _ => write!(f, "{r}"),
    }
}

fn write_list<T: Display>(f: &mut Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(x) => f.write_str(x),
            Expr::Null => f.write_str("null"),
            Expr::Omega => f.write_str("omega"),
            Expr::Field(r, name) => {
                write_receiver(f, r)?;
                write!(f, ".{name}")
            }
            Expr::Assign(r, name, v) => {
                write_receiver(f, r)?;
                write!(f, ".{name} = {v}")
            }
            Expr::Invoke(r, m, args) => {
                write_receiver(f, r)?;
                write!(f, ".{m}(")?;
                write_list(f, args)?;
                f.write_char(')')
            }
            Expr::New(c, args) => {
                write!(f, "new {c}(")?;
                write_list(f, args)?;
                f.write_char(')')
            }
        }
    }
}

impl Display for Predicate {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Top => f.write_str("top"),
            Predicate::Nil => f.write_str("nn"),
            Predicate::Object(entries) => {
                f.write_char('<')?;
                write_list(f, entries)?;
                f.write_char('>')
            }
        }
    }
}

impl Display for Entry {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.label, self.member)
    }
}

impl Display for Member {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Member::Value(p) => write!(f, "{p}"),
            Member::Method { this, args, result } => {
                write!(f, "({this} ::")?;
                if !args.is_empty() {
                    f.write_char(' ')?;
                    write_list(f, args)?;
                }
                write!(f, " -> {result})")
            }
        }
    }
}

impl Display for ClassDecl {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        writeln!(f, "class {} extends {} {{", self.name, self.superclass)?;
        for fd in &self.fields {
            writeln!(f, "    {} {}", fd.ty, fd.name)?;
        }
        for md in &self.methods {
            write!(f, "    {} {}(", md.return_type, md.name)?;
            for (i, p) in md.params.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{} {}", p.ty, p.name)?;
            }
            writeln!(f, ") {{ {} }}", md.body)?;
        }
        f.write_char('}')
    }
}

impl Display for Program {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        for c in &self.classes {
            writeln!(f, "{c}")?;
        }
        writeln!(f, "{}", self.main)
    }
}

pub fn pretty<T: Display + ?Sized>(value: &T) -> String {
    value.to_string()
}
