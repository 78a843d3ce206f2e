//! C interface to the pfj toolchain.
//!
//! Programs are opaque handles created by [`pfj_program_parse`] and released
//! with [`pfj_program_free`]. Every function returns a [`PfjStatus`]; on
//! failure a message is available from [`pfj_last_error`] on the same thread.
//! Strings handed out through `out` parameters are owned by the caller and
//! must be released with [`pfj_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pfj::approx::{analyze_termination, approximants, TerminationVerdict};
use pfj::eval::{reduce, Outcome};
use pfj::parser::{parse_predicate, parse_program};
use pfj::predicates::{check_predicate, infer_predicates, PredEnv, PredicateError, Verdict};
use pfj::program::{check_program, CheckFailure, CheckedProgram};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PfjStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    SyntaxError = 3,
    CheckFailed = 4,
    BudgetExhausted = 5,
    StuckNull = 6,
    NotProven = 7,
    IllFormedQuery = 8,
    Panic = 9,
}

/// A parsed program together with the outcome of its static checks.
pub struct PfjProgram {
    checked: Result<CheckedProgram, CheckFailure>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: PfjStatus, msg: impl Into<String>) -> PfjStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning panics into [`PfjStatus::Panic`].
fn guard(f: impl FnOnce() -> PfjStatus) -> PfjStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(PfjStatus::Panic, msg)
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, PfjStatus> {
    if s.is_null() {
        return Err(fail(PfjStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(PfjStatus::InvalidUtf8, "argument is not valid UTF-8"))
}

unsafe fn write_str(out: *mut *mut c_char, s: &str) {
    if !out.is_null() {
        *out = CString::new(s.replace('\0', " ")).map(CString::into_raw).unwrap_or(ptr::null_mut());
    }
}

unsafe fn checked<'a>(program: *const PfjProgram) -> Result<&'a CheckedProgram, PfjStatus> {
    if program.is_null() {
        return Err(fail(PfjStatus::NullArgument, "null program handle"));
    }
    (*program).checked.as_ref().map_err(|f| fail(PfjStatus::CheckFailed, f.to_string()))
}

fn predicate_status(e: PredicateError) -> PfjStatus {
    let status = match e {
        PredicateError::UniverseTooLarge { .. } => PfjStatus::BudgetExhausted,
        _ => PfjStatus::IllFormedQuery,
    };
    fail(status, e.to_string())
}

/// Parses `source` and runs the static checks. A program that parses but
/// fails its checks still yields a handle; analyses on it report
/// `PFJ_STATUS_CHECK_FAILED`.
///
/// # Safety
/// `source` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pfj_program_parse(source: *const c_char, out: *mut *mut PfjProgram) -> PfjStatus {
    guard(|| {
        if out.is_null() {
            return fail(PfjStatus::NullArgument, "null output pointer");
        }
        *out = ptr::null_mut();
        let src = match read_str(source) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match parse_program(src) {
            Ok(program) => {
                *out = Box::into_raw(Box::new(PfjProgram { checked: check_program(program) }));
                PfjStatus::Ok
            }
            Err(e) => fail(PfjStatus::SyntaxError, e.to_string()),
        }
    })
}

/// # Safety
/// `program` must come from [`pfj_program_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pfj_program_free(program: *mut PfjProgram) {
    if !program.is_null() {
        drop(Box::from_raw(program));
    }
}

/// Reports the static check verdict; on success writes the type of main.
///
/// # Safety
/// `program` must be a live handle; `main_type` may be null.
#[no_mangle]
pub unsafe extern "C" fn pfj_program_check(program: *const PfjProgram, main_type: *mut *mut c_char) -> PfjStatus {
    guard(|| match checked(program) {
        Ok(c) => {
            write_str(main_type, &c.main_type.to_string());
            PfjStatus::Ok
        }
        Err(status) => status,
    })
}

/// Reduces main for at most `max_steps` steps and writes the final expression.
///
/// # Safety
/// `program` must be a live handle; `result` and `steps` may be null.
#[no_mangle]
pub unsafe extern "C" fn pfj_program_run(
    program: *const PfjProgram,
    max_steps: usize,
    result: *mut *mut c_char,
    steps: *mut usize,
) -> PfjStatus {
    guard(|| {
        let c = match checked(program) {
            Ok(c) => c,
            Err(status) => return status,
        };
        let red = match reduce(&c.ec, &c.program.main, max_steps, false) {
            Ok(red) => red,
            Err(e) => return fail(PfjStatus::CheckFailed, e.to_string()),
        };
        write_str(result, &red.expr.to_string());
        if !steps.is_null() {
            *steps = red.steps;
        }
        match red.outcome {
            Outcome::Normal => PfjStatus::Ok,
            Outcome::BudgetExhausted => fail(PfjStatus::BudgetExhausted, "step budget exhausted"),
            Outcome::StuckNull => fail(PfjStatus::StuckNull, format!("stuck on {}", red.expr)),
            Outcome::StuckOpen => fail(PfjStatus::CheckFailed, format!("stuck on {}", red.expr)),
        }
    })
}

/// Searches for a derivation assigning `predicate` to main and writes it
/// as an indented tree.
///
/// # Safety
/// `program` must be a live handle, `predicate` a NUL-terminated string;
/// `derivation` may be null.
#[no_mangle]
pub unsafe extern "C" fn pfj_program_check_predicate(
    program: *const PfjProgram,
    predicate: *const c_char,
    depth: usize,
    derivation: *mut *mut c_char,
) -> PfjStatus {
    guard(|| {
        let c = match checked(program) {
            Ok(c) => c,
            Err(status) => return status,
        };
        let p = match read_str(predicate).map(parse_predicate) {
            Ok(Ok(p)) => p,
            Ok(Err(e)) => return fail(PfjStatus::IllFormedQuery, e.to_string()),
            Err(status) => return status,
        };
        match check_predicate(&c.ec, &PredEnv::new(), &c.program.main, &c.main_class(), &p, depth) {
            Ok(Verdict::Proven(d)) => {
                write_str(derivation, &d.to_text());
                PfjStatus::Ok
            }
            Ok(Verdict::NotProvenWithinBound) => fail(PfjStatus::NotProven, format!("not proven within depth {depth}")),
            Err(e) => predicate_status(e),
        }
    })
}

/// Writes every derivable predicate of main, one per line.
///
/// # Safety
/// `program` must be a live handle; `predicates` may be null.
#[no_mangle]
pub unsafe extern "C" fn pfj_program_infer(
    program: *const PfjProgram,
    depth: usize,
    predicates: *mut *mut c_char,
) -> PfjStatus {
    guard(|| {
        let c = match checked(program) {
            Ok(c) => c,
            Err(status) => return status,
        };
        match infer_predicates(&c.ec, &PredEnv::new(), &c.program.main, &c.main_class(), depth) {
            Ok(ps) => {
                let lines: Vec<String> = ps.iter().map(ToString::to_string).collect();
                write_str(predicates, &lines.join("\n"));
                PfjStatus::Ok
            }
            Err(e) => predicate_status(e),
        }
    })
}

/// Writes the approximants of main within `steps`, one per line.
///
/// # Safety
/// `program` must be a live handle; `out` and `complete` may be null.
#[no_mangle]
pub unsafe extern "C" fn pfj_program_approximants(
    program: *const PfjProgram,
    steps: usize,
    out: *mut *mut c_char,
    complete: *mut bool,
) -> PfjStatus {
    guard(|| {
        let c = match checked(program) {
            Ok(c) => c,
            Err(status) => return status,
        };
        let set = approximants(&c.ec, &c.program.main, steps);
        let lines: Vec<String> = set.expressions.iter().map(ToString::to_string).collect();
        write_str(out, &lines.join("\n"));
        if !complete.is_null() {
            *complete = set.complete;
        }
        PfjStatus::Ok
    })
}

/// Looks for a normal predicate of main. On success writes the predicate;
/// `PFJ_STATUS_NOT_PROVEN` means no evidence was found.
///
/// # Safety
/// `program` must be a live handle; `predicate` may be null.
#[no_mangle]
pub unsafe extern "C" fn pfj_program_analyze(
    program: *const PfjProgram,
    depth: usize,
    steps: usize,
    predicate: *mut *mut c_char,
) -> PfjStatus {
    guard(|| {
        let c = match checked(program) {
            Ok(c) => c,
            Err(status) => return status,
        };
        match analyze_termination(&c.ec, &PredEnv::new(), &c.program.main, &c.main_class(), depth, steps) {
            Ok(TerminationVerdict::WillHeadNormalize(ev)) => {
                write_str(predicate, &ev.predicate.to_string());
                PfjStatus::Ok
            }
            Ok(TerminationVerdict::NoEvidence) => fail(PfjStatus::NotProven, "no evidence of head normalisation"),
            Err(e) => predicate_status(e),
        }
    })
}

/// The message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn pfj_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pfj_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn pfj_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
