//! C ABI for the fmatch solver.
//!
//! Graphs and solutions are opaque heap handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call
//! returns an [`FmStatus`]; the message of the last failure on the calling
//! thread is available from [`fm_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fmatch::blocking::{solve_from, SolveOptions};
use fmatch::graph::{parse_graph, DegreeBound, Matching, Multigraph};
use fmatch::oracle::brute_force_max_f_matching;
use fmatch::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    Infeasible = 4,
    TooLarge = 5,
    Refused = 6,
    Internal = 7,
}

/// A multigraph with degree bounds.
pub struct FmGraph {
    g: Multigraph,
    f: DegreeBound,
}

/// A maximum f-matching with its phase statistics.
pub struct FmSolution {
    edges: Vec<usize>,
    sat_lengths: Vec<usize>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> FmStatus {
    match e {
        Error::Parse { .. } => FmStatus::ParseError,
        Error::VertexRange { .. } | Error::UnknownEdge(_) | Error::UnknownVertex(_) | Error::InvalidTrail(_) => {
            FmStatus::InvalidArgument
        }
        Error::Infeasible { .. } => FmStatus::Infeasible,
        Error::TooLarge { .. } => FmStatus::TooLarge,
        Error::Refused(_) => FmStatus::Refused,
        _ => FmStatus::Internal,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (FmStatus, String)>) -> FmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FmStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("panic inside fmatch");
            FmStatus::Internal
        }
    }
}

fn lib_err(e: Error) -> (FmStatus, String) {
    (status_of(&e), e.to_string())
}

fn null() -> (FmStatus, String) {
    (FmStatus::NullPointer, "null pointer argument".into())
}

/// Message of the last failed call on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// New graph on `n` vertices, no edges, all bounds 1.
#[no_mangle]
pub extern "C" fn fm_graph_new(n: usize) -> *mut FmGraph {
    Box::into_raw(Box::new(FmGraph {
        g: Multigraph::new(n),
        f: DegreeBound::uniform(n, 1),
    }))
}

/// # Safety
/// `graph` must come from this library and not be freed; `edge_id` may be null.
#[no_mangle]
pub unsafe extern "C" fn fm_graph_add_edge(graph: *mut FmGraph, u: usize, v: usize, edge_id: *mut usize) -> FmStatus {
    guard(|| {
        let gr = unsafe { graph.as_mut() }.ok_or_else(null)?;
        let e = gr.g.add_edge(u, v).map_err(lib_err)?;
        if !edge_id.is_null() {
            unsafe { *edge_id = e };
        }
        Ok(())
    })
}

/// # Safety
/// `graph` must come from this library and not be freed.
#[no_mangle]
pub unsafe extern "C" fn fm_graph_set_bound(graph: *mut FmGraph, v: usize, bound: u32) -> FmStatus {
    guard(|| {
        let gr = unsafe { graph.as_mut() }.ok_or_else(null)?;
        if v >= gr.g.vertex_count() {
            return Err((FmStatus::InvalidArgument, format!("vertex {v} out of range")));
        }
        gr.f.set(v, bound);
        Ok(())
    })
}

/// Parses the text graph format into a new graph stored in `*out`.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fm_graph_parse(text: *const c_char, out: *mut *mut FmGraph) -> FmStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return Err(null());
        }
        let s = unsafe { CStr::from_ptr(text) }
            .to_str()
            .map_err(|_| (FmStatus::ParseError, "input is not UTF-8".to_string()))?;
        let (g, f) = parse_graph(s).map_err(lib_err)?;
        unsafe { *out = Box::into_raw(Box::new(FmGraph { g, f })) };
        Ok(())
    })
}

/// # Safety
/// `graph` must come from this library; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fm_graph_free(graph: *mut FmGraph) {
    if !graph.is_null() {
        drop(unsafe { Box::from_raw(graph) });
    }
}

/// # Safety
/// `graph` must be a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn fm_graph_vertex_count(graph: *const FmGraph) -> usize {
    unsafe { graph.as_ref() }.map_or(0, |g| g.g.vertex_count())
}

/// # Safety
/// `graph` must be a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn fm_graph_edge_count(graph: *const FmGraph) -> usize {
    unsafe { graph.as_ref() }.map_or(0, |g| g.g.edge_count())
}

/// Computes a maximum f-matching from the empty matching.
///
/// # Safety
/// `graph` must be a live graph handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fm_solve(graph: *const FmGraph, out: *mut *mut FmSolution) -> FmStatus {
    guard(|| {
        let gr = unsafe { graph.as_ref() }.ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let sol = solve_from(&gr.g, &gr.f, &Matching::empty(&gr.g), SolveOptions::default()).map_err(lib_err)?;
        let s = FmSolution {
            edges: sol.matching.edges().collect(),
            sat_lengths: sol.stats.sat_lengths(),
        };
        unsafe { *out = Box::into_raw(Box::new(s)) };
        Ok(())
    })
}

/// # Safety
/// `solution` must be a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn fm_solution_cardinality(solution: *const FmSolution) -> usize {
    unsafe { solution.as_ref() }.map_or(0, |s| s.edges.len())
}

/// # Safety
/// `solution` must be a live solution handle.
#[no_mangle]
pub unsafe extern "C" fn fm_solution_phase_count(solution: *const FmSolution) -> usize {
    unsafe { solution.as_ref() }.map_or(0, |s| s.sat_lengths.len())
}

/// Copies up to `cap` matched edge ids into `buf` and returns the total
/// number of matched edges.
///
/// # Safety
/// `buf` must have room for `cap` values (it may be null when `cap` is 0).
#[no_mangle]
pub unsafe extern "C" fn fm_solution_edges(solution: *const FmSolution, buf: *mut usize, cap: usize) -> usize {
    let Some(s) = (unsafe { solution.as_ref() }) else { return 0 };
    let k = cap.min(s.edges.len());
    if k > 0 && !buf.is_null() {
        unsafe { ptr::copy_nonoverlapping(s.edges.as_ptr(), buf, k) };
    }
    s.edges.len()
}

/// Sat length of phase `phase` (0-based).
///
/// # Safety
/// `solution` must be a live solution handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fm_solution_sat_length(solution: *const FmSolution, phase: usize, out: *mut usize) -> FmStatus {
    guard(|| {
        let s = unsafe { solution.as_ref() }.ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let v = *s
            .sat_lengths
            .get(phase)
            .ok_or_else(|| (FmStatus::InvalidArgument, format!("no phase {phase}")))?;
        unsafe { *out = v };
        Ok(())
    })
}

/// # Safety
/// `solution` must come from this library; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fm_solution_free(solution: *mut FmSolution) {
    if !solution.is_null() {
        drop(unsafe { Box::from_raw(solution) });
    }
}

/// Maximum cardinality by exhaustive search; refuses graphs with many edges.
///
/// # Safety
/// `graph` must be a live graph handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fm_brute_force(graph: *const FmGraph, out: *mut usize) -> FmStatus {
    guard(|| {
        let gr = unsafe { graph.as_ref() }.ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let r = brute_force_max_f_matching(&gr.g, &gr.f).map_err(lib_err)?;
        unsafe { *out = r.max_cardinality };
        Ok(())
    })
}
