//! C ABI for the corrclust library.
//!
//! Handles are opaque pointers owned by the library; every constructor has
//! a matching `_free`, and strings returned through `char**` must be
//! released with `cc_string_free`. Functions return a `CcStatus`; on any
//! failure `cc_last_error` carries a thread-local message valid until the
//! next failing call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use corrclust::cost::{brute_force_opt, CostReport, PNorm};
use corrclust::engine::{self, ArrivalOrder, Clustering};
use corrclust::graph::SignedGraph;
use corrclust::sampling::{Epsilon, SubsampleBundle};

/// Result codes for every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcStatus {
    CcOk = 0,
    CcNullArgument = 1,
    CcInvalidArgument = 2,
    CcParseError = 3,
    CcLimitExceeded = 4,
    CcInternalError = 5,
}

pub struct CcGraph(SignedGraph);

pub struct CcBundle(SubsampleBundle);

pub struct CcClustering(Clustering);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into()).unwrap_or_else(|_| CString::new("invalid error").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: CcStatus, msg: impl Into<String>) -> CcStatus {
    set_error(msg);
    status
}

fn guard(body: impl FnOnce() -> CcStatus) -> CcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(CcStatus::CcInternalError, "library panicked"),
    }
}

/// Message of the most recent failure on this thread, or NULL.
/// The pointer stays valid until the next failing call on the thread.
#[no_mangle]
pub extern "C" fn cc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map_or(ptr::null(), |c| c.as_ptr())
    })
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must have been returned by a `cc_*` function and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn export_string(s: String, out: *mut *mut c_char) -> CcStatus {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            CcStatus::CcOk
        }
        Err(_) => fail(CcStatus::CcInternalError, "output contained NUL"),
    }
}

/// Parse a graph document (first line "n m", then edges "u v").
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cc_graph_parse(
    text: *const c_char,
    out: *mut *mut CcGraph,
) -> CcStatus {
    if text.is_null() || out.is_null() {
        return fail(CcStatus::CcNullArgument, "null argument");
    }
    guard(|| {
        let text = match unsafe { CStr::from_ptr(text) }.to_str() {
            Ok(t) => t,
            Err(_) => return fail(CcStatus::CcParseError, "graph text is not UTF-8"),
        };
        match SignedGraph::parse(text) {
            Ok(g) => {
                unsafe { *out = Box::into_raw(Box::new(CcGraph(g))) };
                CcStatus::CcOk
            }
            Err(e) => fail(CcStatus::CcParseError, e.to_string()),
        }
    })
}

/// # Safety
/// `g` must be a live handle from `cc_graph_parse` (or NULL).
#[no_mangle]
pub unsafe extern "C" fn cc_graph_free(g: *mut CcGraph) {
    if !g.is_null() {
        drop(unsafe { Box::from_raw(g) });
    }
}

/// # Safety
/// `g` must be a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn cc_graph_vertex_count(g: *const CcGraph) -> u32 {
    if g.is_null() {
        return 0;
    }
    unsafe { &*g }.0.n()
}

/// # Safety
/// `g` must be a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn cc_graph_positive_edge_count(g: *const CcGraph) -> u64 {
    if g.is_null() {
        return 0;
    }
    unsafe { &*g }.0.positive_edge_count() as u64
}

/// Canonical text serialization of the graph.
///
/// # Safety
/// `g` must be a live graph handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cc_graph_serialize(
    g: *const CcGraph,
    out: *mut *mut c_char,
) -> CcStatus {
    if g.is_null() || out.is_null() {
        return fail(CcStatus::CcNullArgument, "null argument");
    }
    guard(|| export_string(unsafe { &*g }.0.serialize(), out))
}

/// Draw the sample S and its four subsamples with probability
/// ε = eps_num/eps_den (exact rational, 0 < ε < 1).
///
/// # Safety
/// `g` must be a live graph handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cc_bundle_draw(
    g: *const CcGraph,
    eps_num: u64,
    eps_den: u64,
    seed: u64,
    out: *mut *mut CcBundle,
) -> CcStatus {
    if g.is_null() || out.is_null() {
        return fail(CcStatus::CcNullArgument, "null argument");
    }
    guard(|| {
        let eps = match Epsilon::new(eps_num, eps_den) {
            Ok(e) => e,
            Err(e) => return fail(CcStatus::CcInvalidArgument, e.to_string()),
        };
        let bundle = SubsampleBundle::draw(&unsafe { &*g }.0, eps, seed);
        unsafe { *out = Box::into_raw(Box::new(CcBundle(bundle))) };
        CcStatus::CcOk
    })
}

/// # Safety
/// `b` must be a live handle from `cc_bundle_draw` (or NULL).
#[no_mangle]
pub unsafe extern "C" fn cc_bundle_free(b: *mut CcBundle) {
    if !b.is_null() {
        drop(unsafe { Box::from_raw(b) });
    }
}

/// Bundle as JSON ({epsilon, seed, S, S_p, S_d, S_b, S_r}).
///
/// # Safety
/// `b` must be a live bundle handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cc_bundle_to_json(
    b: *const CcBundle,
    out: *mut *mut c_char,
) -> CcStatus {
    if b.is_null() || out.is_null() {
        return fail(CcStatus::CcNullArgument, "null argument");
    }
    guard(|| export_string(unsafe { &*b }.0.to_json(), out))
}

/// Run the online algorithm. `order` lists the arrival order of V ∖ S;
/// pass NULL to use ascending ids. The sample is processed first.
///
/// # Safety
/// `g` and `b` must be live handles; `order` (when non-NULL) must point to
/// `order_len` readable u32 values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cc_run(
    g: *const CcGraph,
    b: *const CcBundle,
    order: *const u32,
    order_len: usize,
    out: *mut *mut CcClustering,
) -> CcStatus {
    if g.is_null() || b.is_null() || out.is_null() {
        return fail(CcStatus::CcNullArgument, "null argument");
    }
    guard(|| {
        let graph = &unsafe { &*g }.0;
        let bundle = &unsafe { &*b }.0;
        let arrival = if order.is_null() {
            ArrivalOrder::ascending(graph.n(), &bundle.s)
        } else {
            let ids = unsafe { std::slice::from_raw_parts(order, order_len) };
            match ArrivalOrder::new(ids.to_vec(), graph.n(), &bundle.s) {
                Ok(a) => a,
                Err(e) => return fail(CcStatus::CcInvalidArgument, e.to_string()),
            }
        };
        match engine::run(graph, bundle, &arrival) {
            Ok(c) => {
                unsafe { *out = Box::into_raw(Box::new(CcClustering(c))) };
                CcStatus::CcOk
            }
            Err(e) => fail(CcStatus::CcInternalError, e.to_string()),
        }
    })
}

/// # Safety
/// `c` must be a live handle from `cc_run` (or NULL).
#[no_mangle]
pub unsafe extern "C" fn cc_clustering_free(c: *mut CcClustering) {
    if !c.is_null() {
        drop(unsafe { Box::from_raw(c) });
    }
}

/// Cluster id of a vertex, or u32::MAX when out of range.
///
/// # Safety
/// `c` must be a live clustering handle.
#[no_mangle]
pub unsafe extern "C" fn cc_clustering_cluster_of(c: *const CcClustering, v: u32) -> u32 {
    if c.is_null() {
        return u32::MAX;
    }
    let clustering = &unsafe { &*c }.0;
    clustering
        .cluster_of
        .get(v as usize)
        .map_or(u32::MAX, |&id| id as u32)
}

/// Cost report JSON ({edge_cost, y, norms}) of a clustering, with norms
/// 1, 2, and inf.
///
/// # Safety
/// `g` and `c` must be live handles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cc_cost_report_json(
    g: *const CcGraph,
    c: *const CcClustering,
    out: *mut *mut c_char,
) -> CcStatus {
    if g.is_null() || c.is_null() || out.is_null() {
        return fail(CcStatus::CcNullArgument, "null argument");
    }
    guard(|| {
        let graph = &unsafe { &*g }.0;
        let clustering = &unsafe { &*c }.0;
        let ps = [PNorm::Finite(1), PNorm::Finite(2), PNorm::Inf];
        match CostReport::compute(graph, &clustering.cluster_of, &ps) {
            Ok(report) => export_string(
                serde_json::to_string_pretty(&report).expect("report serialization"),
                out,
            ),
            Err(e) => fail(CcStatus::CcInvalidArgument, e.to_string()),
        }
    })
}

/// Exact brute-force optimum (n ≤ 12) as JSON; `p` is "1", "2", ... or "inf".
///
/// # Safety
/// `g` must be a live graph handle; `p` a NUL-terminated string; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn cc_brute_force_opt(
    g: *const CcGraph,
    p: *const c_char,
    out: *mut *mut c_char,
) -> CcStatus {
    if g.is_null() || p.is_null() || out.is_null() {
        return fail(CcStatus::CcNullArgument, "null argument");
    }
    guard(|| {
        let p = match unsafe { CStr::from_ptr(p) }.to_str() {
            Ok(t) => t,
            Err(_) => return fail(CcStatus::CcInvalidArgument, "p is not UTF-8"),
        };
        let p = match PNorm::parse(p) {
            Ok(p) => p,
            Err(e) => return fail(CcStatus::CcInvalidArgument, e.to_string()),
        };
        match brute_force_opt(&unsafe { &*g }.0, p) {
            Ok(opt) => {
                let json = serde_json::json!({
                    "p": opt.p.label(),
                    "opt_cost": opt.norm,
                    "opt_exact": opt.exact.to_string(),
                    "opt_edge_cost": opt.edge_cost,
                    "opt_clustering": opt.clusters,
                });
                export_string(
                    serde_json::to_string_pretty(&json).expect("oracle serialization"),
                    out,
                )
            }
            Err(e) => fail(CcStatus::CcLimitExceeded, e.to_string()),
        }
    })
}
