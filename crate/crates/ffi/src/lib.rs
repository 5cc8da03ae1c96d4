//! C ABI over `cctl_core`: opaque program and graph handles, integer status
//! codes and a per-thread last-error message.
//!
//! Every handle returned through an out-pointer is owned by the caller and
//! released with the matching `*_free` function. Strings returned through
//! out-pointers are released with [`cctl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cctl_core::analysis::{analyze, to_json, Options, StateGraph};
use cctl_core::engine::{solve_ltr, Limits};
use cctl_core::parser::{parse_program, parse_query, print_program};
use cctl_core::pd::check_closedness;
use cctl_core::pipeline::futamura;
use cctl_core::policy::Policy;
use cctl_core::synth::synthesize;
use cctl_core::term::Program;
use cctl_core::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CctlStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Syntax = 3,
    Policy = 4,
    Analysis = 5,
    Run = 6,
    Specialize = 7,
    Synthesis = 8,
    InvalidArgument = 9,
    Panic = 10,
}

/// Which synthesis [`cctl_synthesize`] performs.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CctlMode {
    Classic = 0,
    Futamura = 1,
}

/// A parsed logic program.
pub struct CctlProgram(Program);

/// A state graph produced by analysis.
pub struct CctlGraph(StateGraph);

/// Outcome of [`cctl_run`].
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CctlRunStats {
    pub answers: usize,
    pub inferences: u64,
    /// False when the inference budget cut the search short.
    pub exhausted: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CctlStatus {
    match e {
        Error::Syntax { .. } => CctlStatus::Syntax,
        Error::Policy(_) | Error::Completeness(_) => CctlStatus::Policy,
        Error::Analysis(_) => CctlStatus::Analysis,
        Error::Specialize(_) => CctlStatus::Specialize,
        Error::Synthesis(_) => CctlStatus::Synthesis,
        Error::Stage { source, .. } => status_of(source),
        Error::Usage(_) => CctlStatus::InvalidArgument,
        _ => CctlStatus::Run,
    }
}

/// Runs `f`, recording its error or panic as the last error.
fn guard(f: impl FnOnce() -> Result<(), (CctlStatus, String)>) -> CctlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CctlStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CctlStatus::Panic
        }
    }
}

fn core(e: Error) -> (CctlStatus, String) {
    (status_of(&e), e.to_string())
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (CctlStatus, String)> {
    if p.is_null() {
        return Err((CctlStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (CctlStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (CctlStatus, String)> {
    p.as_ref().ok_or_else(|| (CctlStatus::NullArgument, format!("{what} is null")))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<(), (CctlStatus, String)> {
    if p.is_null() {
        Err((CctlStatus::NullArgument, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn to_c(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cctl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses program text.
///
/// # Safety
/// `text` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cctl_program_parse(text: *const c_char, out: *mut *mut CctlProgram) -> CctlStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let p = parse_program(c_str(text, "text")?).map_err(core)?;
        *out = Box::into_raw(Box::new(CctlProgram(p)));
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cctl_program_free(p: *mut CctlProgram) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of clauses in a program, or 0 for null.
///
/// # Safety
/// `p` must be null or a live program handle.
#[no_mangle]
pub unsafe extern "C" fn cctl_program_clause_count(p: *const CctlProgram) -> usize {
    p.as_ref().map_or(0, |p| p.0.len())
}

/// Canonical program text.
///
/// # Safety
/// `p` must be a live program handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cctl_program_to_string(p: *const CctlProgram, out: *mut *mut c_char) -> CctlStatus {
    guard(|| {
        out_ptr(out, "out")?;
        *out = to_c(print_program(&handle(p, "program")?.0));
        Ok(())
    })
}

/// Analyzes a program under policy text.
///
/// # Safety
/// `p` must be a live program handle, `policy` a nul-terminated string and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cctl_analyze(
    p: *const CctlProgram,
    policy: *const c_char,
    max_states: usize,
    out: *mut *mut CctlGraph,
) -> CctlStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let prog = handle(p, "program")?;
        let pol = Policy::parse(c_str(policy, "policy")?).map_err(core)?;
        let opts = Options { max_states, ..Options::default() };
        let g = analyze(&prog.0, &pol, &opts).map_err(core)?;
        *out = Box::into_raw(Box::new(CctlGraph(g)));
        Ok(())
    })
}

/// # Safety
/// `g` must be null or a graph handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cctl_graph_free(g: *mut CctlGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of states, or 0 for null.
///
/// # Safety
/// `g` must be null or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn cctl_graph_state_count(g: *const CctlGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.states.len())
}

/// The graph as JSON.
///
/// # Safety
/// `g` must be a live graph handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cctl_graph_to_json(g: *const CctlGraph, out: *mut *mut c_char) -> CctlStatus {
    guard(|| {
        out_ptr(out, "out")?;
        *out = to_c(to_json(&handle(g, "graph")?.0));
        Ok(())
    })
}

/// Synthesizes a left-to-right program from a graph of `p`.
///
/// # Safety
/// `g` and `p` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cctl_synthesize(
    g: *const CctlGraph,
    p: *const CctlProgram,
    mode: CctlMode,
    out: *mut *mut CctlProgram,
) -> CctlStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let (g, p) = (&handle(g, "graph")?.0, &handle(p, "program")?.0);
        let prog = match mode {
            CctlMode::Classic => synthesize(g, p).map_err(core)?.program(),
            CctlMode::Futamura => {
                let r = futamura(g, p, None, None).map_err(core)?;
                let v = check_closedness(&r);
                if !v.is_empty() {
                    return Err((CctlStatus::Specialize, format!("residual not closed: {}", v.join("; "))));
                }
                r.program()
            }
        };
        *out = Box::into_raw(Box::new(CctlProgram(prog)));
        Ok(())
    })
}

/// Enumerates all answers of `query` left to right within `max_inferences`.
///
/// # Safety
/// `p` must be a live program handle, `query` a nul-terminated string and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cctl_run(
    p: *const CctlProgram,
    query: *const c_char,
    max_inferences: u64,
    out: *mut CctlRunStats,
) -> CctlStatus {
    guard(|| {
        out_ptr(out, "out")?;
        if max_inferences == 0 {
            return Err((CctlStatus::InvalidArgument, "max_inferences must be positive".into()));
        }
        let prog = handle(p, "program")?;
        let (q, _) = parse_query(c_str(query, "query")?).map_err(core)?;
        let r = solve_ltr(&prog.0, &q, Limits { max_inferences, ..Limits::default() }).map_err(core)?;
        *out = CctlRunStats { answers: r.answers.len(), inferences: r.inferences, exhausted: r.exhausted };
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cctl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
