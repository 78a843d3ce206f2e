//! The full static pipeline for a program: well-formedness, method typing
//! and the type of the main expression.

use std::fmt;

use crate::context::{ExecutionContext, Violation};
use crate::syntax::{Name, Program, OBJECT};
use crate::typecheck::{MethodTypeViolation, Ty, TypeChecker, TypeEnv, TypeError};

#[derive(Debug, Clone)]
pub struct CheckedProgram {
    pub program: Program,
    pub ec: ExecutionContext,
    pub main_type: Ty,
}

impl CheckedProgram {
    /// The class at which the main expression is analysed: its minimal
    /// type, or `Object` when main is `null`.
    pub fn main_class(&self) -> Name {
        self.main_type.class().cloned().unwrap_or_else(|| Name::from(OBJECT))
    }
}

#[derive(Debug, Clone)]
pub enum CheckFailure {
    IllFormed(Vec<Violation>),
    MethodTypes(Vec<MethodTypeViolation>),
    Main(TypeError),
}

impl CheckFailure {
    pub fn messages(&self) -> Vec<String> {
        match self {
            CheckFailure::IllFormed(vs) => vs.iter().map(ToString::to_string).collect(),
            CheckFailure::MethodTypes(vs) => vs.iter().map(ToString::to_string).collect(),
            CheckFailure::Main(e) => vec![e.to_string()],
        }
    }
}

impl fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.messages().join("\n"))
    }
}

pub fn check_program(program: Program) -> Result<CheckedProgram, CheckFailure> {
    let ec = ExecutionContext::new(program.classes.clone());
    ec.check_wellformed().map_err(CheckFailure::IllFormed)?;
    ec.check_type_consistent().map_err(CheckFailure::MethodTypes)?;
    let main_type = TypeChecker::new(&ec).min_type(&TypeEnv::new(), &program.main).map_err(CheckFailure::Main)?;
    Ok(CheckedProgram { program, ec, main_type })
}
