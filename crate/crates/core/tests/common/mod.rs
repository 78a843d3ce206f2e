#![allow(dead_code)]

pub mod gen;
pub mod oracle;

use std::path::PathBuf;

use pfj::parser::parse_program;
use pfj::program::{check_program, CheckedProgram};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture_path(name: &str) -> PathBuf {
    fixture_dir().join(format!("{name}.pfj"))
}

pub fn fixture(name: &str) -> CheckedProgram {
    let src = std::fs::read_to_string(fixture_path(name)).unwrap();
    check_program(parse_program(&src).unwrap()).unwrap()
}

/// Every fixture that passes the static checks, by file stem.
pub fn corpus() -> Vec<(String, CheckedProgram)> {
    let mut names: Vec<String> = std::fs::read_dir(fixture_dir())
        .unwrap()
        .filter_map(|e| {
            let path = e.ok()?.path();
            (path.extension()? == "pfj").then(|| path.file_stem()?.to_str().map(String::from))?
        })
        .collect();
    names.sort();
    names
        .into_iter()
        .filter_map(|n| {
            let src = std::fs::read_to_string(fixture_path(&n)).ok()?;
            let checked = check_program(parse_program(&src).ok()?).ok()?;
            Some((n, checked))
        })
        .collect()
}
