//! C ABI over the pcnpath planners: opaque handles, integer status codes,
//! and a thread-local last-error message. The header is generated into
//! `include/pcnpath.h` at build time.
//!
//! Ownership rules: every `*mut` handle returned through an out-parameter
//! is owned by the caller and must be released with the matching `_free`
//! function exactly once. Accessors borrow and never free.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pcnpath::fee::FeeMap;
use pcnpath::graph::ChannelGraph;
use pcnpath::search::{
    brute_force_lowest_fee, plan_partial_bidirectional, plan_unidirectional,
    plan_unidirectional_barrier, PathResult, PlanOutcome, Query,
};
use pcnpath::snapshot::{load_snapshot_file, load_snapshot_str};
use pcnpath::FeeSemantics;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum PcnStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The snapshot file could not be read.
    Io = 3,
    /// The snapshot JSON failed to parse or validate.
    Parse = 4,
    /// A vertex key is not present in the graph.
    UnknownVertex = 5,
    /// The query is malformed (equal endpoints, non-positive amount).
    InvalidQuery = 6,
    /// No feasible route exists; no route handle is produced.
    NoPath = 7,
    /// The graph exceeds the exhaustive planner's size guard.
    TooLarge = 8,
    /// Unexpected internal failure; see pcn_last_error_message.
    Internal = 9,
}

/// Planner selector for pcn_plan.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum PcnPlanner {
    /// Search from the destination over the transpose graph.
    Unidirectional = 0,
    /// Early exit at any in-neighbour of the source; fee quoted with
    /// first-hop fees at zero.
    PartialBidirectional = 1,
    /// Balance barrier folded into the fee instead of an explicit check.
    Barrier = 2,
    /// Exhaustive enumeration; small graphs only.
    Oracle = 3,
}

/// Opaque channel graph handle.
pub struct PcnGraph {
    inner: ChannelGraph,
}

/// Opaque planned-route handle.
pub struct PcnRoute {
    inner: PathResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl AsRef<str>) {
    let sanitized = message.as_ref().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `cap` bytes) and return the full length including the NUL.
/// With a null `buf` or zero `cap`, only the required length is returned.
///
/// # Safety
/// When `buf` is non-null it must point to at least `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn pcn_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes_with_nul();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            // always terminate
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

unsafe fn required_str<'a>(arg: *const c_char) -> Result<&'a str, PcnStatus> {
    if arg.is_null() {
        set_error("null string argument");
        return Err(PcnStatus::NullPointer);
    }
    CStr::from_ptr(arg).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        PcnStatus::InvalidUtf8
    })
}

fn emit_graph(
    out: *mut *mut PcnGraph,
    result: Result<(ChannelGraph, pcnpath::IngestReport), pcnpath::snapshot::IngestError>,
) -> PcnStatus {
    match result {
        Ok((graph, _)) => {
            unsafe { *out = Box::into_raw(Box::new(PcnGraph { inner: graph })) };
            PcnStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            match e {
                pcnpath::snapshot::IngestError::Io(_) => PcnStatus::Io,
                _ => PcnStatus::Parse,
            }
        }
    }
}

/// Load a snapshot JSON file (lnd describegraph schema) into a new graph
/// handle. On success `*out` owns the graph; free it with pcn_graph_free.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pcn_graph_load_file(
    path: *const c_char,
    out: *mut *mut PcnGraph,
) -> PcnStatus {
    if out.is_null() {
        set_error("null out-parameter");
        return PcnStatus::NullPointer;
    }
    *out = ptr::null_mut();
    let path = match required_str(path) {
        Ok(s) => s,
        Err(status) => return status,
    };
    catch_unwind(AssertUnwindSafe(|| {
        emit_graph(out, load_snapshot_file(path))
    }))
    .unwrap_or_else(|_| {
        set_error("internal panic while loading snapshot");
        PcnStatus::Internal
    })
}

/// Parse snapshot JSON from memory into a new graph handle.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pcn_graph_load_json(
    json: *const c_char,
    out: *mut *mut PcnGraph,
) -> PcnStatus {
    if out.is_null() {
        set_error("null out-parameter");
        return PcnStatus::NullPointer;
    }
    *out = ptr::null_mut();
    let json = match required_str(json) {
        Ok(s) => s,
        Err(status) => return status,
    };
    catch_unwind(AssertUnwindSafe(|| {
        emit_graph(out, load_snapshot_str(json))
    }))
    .unwrap_or_else(|_| {
        set_error("internal panic while parsing snapshot");
        PcnStatus::Internal
    })
}

/// Release a graph handle. Null is a no-op.
///
/// # Safety
/// `g` must have come from a pcn_graph_load_* call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pcn_graph_free(g: *mut PcnGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of vertices, or 0 for a null handle.
///
/// # Safety
/// `g` must be a live graph handle or null.
#[no_mangle]
pub unsafe extern "C" fn pcn_graph_vertex_count(g: *const PcnGraph) -> usize {
    g.as_ref().map_or(0, |g| g.inner.vertex_count())
}

/// Number of directed arcs, or 0 for a null handle.
///
/// # Safety
/// `g` must be a live graph handle or null.
#[no_mangle]
pub unsafe extern "C" fn pcn_graph_arc_count(g: *const PcnGraph) -> usize {
    g.as_ref().map_or(0, |g| g.inner.arc_count())
}

/// Dense index of the vertex with the given key, or -1 when absent.
///
/// # Safety
/// `g` must be a live graph handle or null; `key` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pcn_graph_vertex_index(g: *const PcnGraph, key: *const c_char) -> i64 {
    let Some(graph) = g.as_ref() else { return -1 };
    let Ok(key) = required_str(key) else {
        return -1;
    };
    graph.inner.vertex_by_key(key).map_or(-1, |v| v.0 as i64)
}

/// Plan one payment. On success `*out` owns the route handle; a NoPath
/// status leaves `*out` null and is not an error of the call itself.
///
/// # Safety
/// `g` must be a live graph handle; `source`/`destination` NUL-terminated
/// strings; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pcn_plan(
    g: *const PcnGraph,
    source: *const c_char,
    destination: *const c_char,
    amount: f64,
    planner: PcnPlanner,
    out: *mut *mut PcnRoute,
) -> PcnStatus {
    if out.is_null() {
        set_error("null out-parameter");
        return PcnStatus::NullPointer;
    }
    *out = ptr::null_mut();
    let Some(graph) = g.as_ref() else {
        set_error("null graph handle");
        return PcnStatus::NullPointer;
    };
    let (source, destination) = match (required_str(source), required_str(destination)) {
        (Ok(s), Ok(d)) => (s, d),
        (Err(status), _) | (_, Err(status)) => return status,
    };
    let graph = &graph.inner;
    let Some(s) = graph.vertex_by_key(source) else {
        set_error(format!("unknown source vertex key {source:?}"));
        return PcnStatus::UnknownVertex;
    };
    let Some(t) = graph.vertex_by_key(destination) else {
        set_error(format!("unknown destination vertex key {destination:?}"));
        return PcnStatus::UnknownVertex;
    };
    let query = match Query::new(s, t, amount) {
        Ok(q) => q,
        Err(e) => {
            set_error(e.to_string());
            return PcnStatus::InvalidQuery;
        }
    };

    let outcome = catch_unwind(AssertUnwindSafe(|| match planner {
        PcnPlanner::Unidirectional => plan_unidirectional(graph, &query, &FeeMap::Linear),
        PcnPlanner::PartialBidirectional => {
            plan_partial_bidirectional(graph, &query, &FeeMap::Linear)
        }
        PcnPlanner::Barrier => plan_unidirectional_barrier(graph, &query),
        PcnPlanner::Oracle => brute_force_lowest_fee(graph, &query, &FeeMap::Linear, 14),
    }));
    match outcome {
        Ok(Ok(PlanOutcome::Route(route))) => {
            *out = Box::into_raw(Box::new(PcnRoute { inner: route }));
            PcnStatus::Ok
        }
        Ok(Ok(PlanOutcome::NoPath(_))) => {
            set_error("no feasible route");
            PcnStatus::NoPath
        }
        Ok(Err(e)) => {
            set_error(e.to_string());
            match e {
                pcnpath::search::SearchError::OracleGuard { .. } => PcnStatus::TooLarge,
                pcnpath::search::SearchError::Graph(_) => PcnStatus::UnknownVertex,
                _ => PcnStatus::Internal,
            }
        }
        Err(_) => {
            set_error("internal panic while planning");
            PcnStatus::Internal
        }
    }
}

/// Release a route handle. Null is a no-op.
///
/// # Safety
/// `r` must have come from pcn_plan and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pcn_route_free(r: *mut PcnRoute) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Total fee of the route under its fee semantics; NaN for null handles.
///
/// # Safety
/// `r` must be a live route handle or null.
#[no_mangle]
pub unsafe extern "C" fn pcn_route_total_fee(r: *const PcnRoute) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.inner.total_fee)
}

/// Number of arcs in the route.
///
/// # Safety
/// `r` must be a live route handle or null.
#[no_mangle]
pub unsafe extern "C" fn pcn_route_hop_count(r: *const PcnRoute) -> usize {
    r.as_ref().map_or(0, |r| r.inner.arcs.len())
}

/// True when the fee is quoted with source-adjacent fees at zero (the
/// partial-bidirectional planner's convention).
///
/// # Safety
/// `r` must be a live route handle or null.
#[no_mangle]
pub unsafe extern "C" fn pcn_route_source_fees_zero(r: *const PcnRoute) -> bool {
    r.as_ref()
        .is_some_and(|r| r.inner.semantics == FeeSemantics::SourceFeesZero)
}

/// Arc-relaxation count of the search that produced this route.
///
/// # Safety
/// `r` must be a live route handle or null.
#[no_mangle]
pub unsafe extern "C" fn pcn_route_relaxations(r: *const PcnRoute) -> u64 {
    r.as_ref().map_or(0, |r| r.inner.stats.relaxations)
}

/// Queue-pop count of the search that produced this route.
///
/// # Safety
/// `r` must be a live route handle or null.
#[no_mangle]
pub unsafe extern "C" fn pcn_route_pops(r: *const PcnRoute) -> u64 {
    r.as_ref().map_or(0, |r| r.inner.stats.pops)
}

/// Wall-clock duration of the search, in nanoseconds.
///
/// # Safety
/// `r` must be a live route handle or null.
#[no_mangle]
pub unsafe extern "C" fn pcn_route_wall_time_ns(r: *const PcnRoute) -> u64 {
    r.as_ref().map_or(0, |r| {
        u64::try_from(r.inner.stats.wall_time.as_nanos()).unwrap_or(u64::MAX)
    })
}

/// Copy hop amounts (hop_count + 1 values, source first) into `buf`,
/// writing at most `cap` values; returns how many values the route has.
///
/// # Safety
/// `r` must be a live route handle or null; when `buf` is non-null it must
/// point to at least `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pcn_route_hop_amounts(
    r: *const PcnRoute,
    buf: *mut f64,
    cap: usize,
) -> usize {
    let Some(route) = r.as_ref() else { return 0 };
    let amounts = route.inner.hop_amounts.as_slice();
    if !buf.is_null() {
        let n = amounts.len().min(cap);
        ptr::copy_nonoverlapping(amounts.as_ptr(), buf, n);
    }
    amounts.len()
}

/// Copy the route's arc ids (payment direction) into `buf`, writing at most
/// `cap` values; returns the hop count.
///
/// # Safety
/// `r` must be a live route handle or null; when `buf` is non-null it must
/// point to at least `cap` writable uint32 slots.
#[no_mangle]
pub unsafe extern "C" fn pcn_route_arc_ids(r: *const PcnRoute, buf: *mut u32, cap: usize) -> usize {
    let Some(route) = r.as_ref() else { return 0 };
    let arcs = &route.inner.arcs;
    if !buf.is_null() {
        for (i, arc) in arcs.iter().take(cap).enumerate() {
            *buf.add(i) = arc.0;
        }
    }
    arcs.len()
}
