//! C ABI for the bridgenet analysis library.
//!
//! All functions follow the same conventions: objects are opaque handles
//! created and destroyed by paired `*_new`/`*_free` calls, fallible calls
//! return a [`BnStatus`] code, and the most recent failure message for the
//! calling thread is available via [`bn_last_error_message`]. Strings
//! returned to the caller are owned by the caller and must be released with
//! [`bn_string_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::os::raw::c_char;
use std::path::Path;

use bridgenet::bridge::{rank, BridgeRanking, WeightTriple};
use bridgenet::community::{louvain, Partition};
use bridgenet::error::Error;
use bridgenet::gexf::{read_gexf, write_gexf};
use bridgenet::graph::ForwardGraph;
use bridgenet::metrics::MetricParams;
use bridgenet::perturb::remove_nodes;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    MalformedId = 3,
    UndefinedMetric = 4,
    NotConverged = 5,
    PartitionMismatch = 6,
    MissingMetric = 7,
    InvalidArgument = 8,
    ParseError = 9,
    IoError = 10,
    OutOfRange = 11,
}

/// Opaque forwarding graph handle.
pub struct BnGraph(ForwardGraph);

/// Opaque bridge-score ranking handle.
pub struct BnRanking(BridgeRanking);

/// Opaque community partition handle.
pub struct BnPartition(Partition);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let cstring = CString::new(message)
        .unwrap_or_else(|_| CString::new("error message contained NUL").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(cstring));
}

fn status_of(err: &Error) -> BnStatus {
    match err {
        Error::MalformedId(_) => BnStatus::MalformedId,
        Error::UndefinedMetric(_) => BnStatus::UndefinedMetric,
        Error::NotConverged { .. } => BnStatus::NotConverged,
        Error::PartitionMismatch(_) => BnStatus::PartitionMismatch,
        Error::MissingMetric(_) => BnStatus::MissingMetric,
        Error::InvalidArgument(_) => BnStatus::InvalidArgument,
        Error::Parse(_) | Error::MissingColumn { .. } | Error::Csv(_) | Error::Json(_) => {
            BnStatus::ParseError
        }
        Error::Io(_) => BnStatus::IoError,
    }
}

fn fail(err: Error) -> BnStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

fn fail_null(what: &str) -> BnStatus {
    set_error(format!("{what} is a null pointer"));
    BnStatus::NullPointer
}

/// Message for the most recent error on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread;
/// do not free it.
#[no_mangle]
pub extern "C" fn bn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |msg| msg.as_ptr())
    })
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by a `bridgenet` function that
/// transfers string ownership, not yet freed; null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn bn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn cstr_arg<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, BnStatus> {
    if ptr.is_null() {
        return Err(fail_null(what));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        BnStatus::InvalidUtf8
    })
}

/// Creates an empty graph. Free with [`bn_graph_free`].
#[no_mangle]
pub extern "C" fn bn_graph_new() -> *mut BnGraph {
    Box::into_raw(Box::new(BnGraph(ForwardGraph::new())))
}

/// # Safety
/// `g` must be a pointer returned by a graph-producing function of this
/// library, not yet freed; null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn bn_graph_free(g: *mut BnGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Records one forwarding event `source -> target`. Self-forwards are
/// dropped and tallied, matching ingestion semantics.
///
/// # Safety
/// `g` must be a live graph handle; `source` and `target` must be valid
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn bn_graph_add_edge(
    g: *mut BnGraph,
    source: *const c_char,
    target: *const c_char,
) -> BnStatus {
    let Some(graph) = g.as_mut() else {
        return fail_null("graph");
    };
    let source = match cstr_arg(source, "source") {
        Ok(s) => s,
        Err(status) => return status,
    };
    let target = match cstr_arg(target, "target") {
        Ok(s) => s,
        Err(status) => return status,
    };
    match graph.0.add_edge(source, target) {
        Ok(_) => BnStatus::Ok,
        Err(e) => fail(e),
    }
}

/// Flags a channel as a seed channel.
///
/// # Safety
/// `g` must be a live graph handle; `id` must be a valid NUL-terminated
/// string.
#[no_mangle]
pub unsafe extern "C" fn bn_graph_mark_seed(g: *mut BnGraph, id: *const c_char) -> BnStatus {
    let Some(graph) = g.as_mut() else {
        return fail_null("graph");
    };
    let id = match cstr_arg(id, "id") {
        Ok(s) => s,
        Err(status) => return status,
    };
    match graph.0.mark_seed(id) {
        Ok(_) => BnStatus::Ok,
        Err(e) => fail(e),
    }
}

/// # Safety
/// `g` must be a live graph handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn bn_graph_node_count(g: *const BnGraph) -> usize {
    g.as_ref().map_or(0, |graph| graph.0.node_count())
}

/// # Safety
/// `g` must be a live graph handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn bn_graph_edge_count(g: *const BnGraph) -> usize {
    g.as_ref().map_or(0, |graph| graph.0.edge_count())
}

/// # Safety
/// `g` must be a live graph handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn bn_graph_total_weight(g: *const BnGraph) -> u64 {
    g.as_ref().map_or(0, |graph| graph.0.total_weight())
}

/// # Safety
/// `g` must be a live graph handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn bn_graph_dropped_self_loops(g: *const BnGraph) -> u64 {
    g.as_ref().map_or(0, |graph| graph.0.dropped_self_loops())
}

unsafe fn write_f64(out: *mut f64, value: f64) -> BnStatus {
    if out.is_null() {
        return fail_null("out");
    }
    *out = value;
    BnStatus::Ok
}

/// Network density `2|E| / (|V|(|V|-1))`.
///
/// # Safety
/// `g` must be a live graph handle; `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn bn_graph_density(g: *const BnGraph, out: *mut f64) -> BnStatus {
    let Some(graph) = g.as_ref() else {
        return fail_null("graph");
    };
    match graph.0.density() {
        Ok(v) => write_f64(out, v),
        Err(e) => fail(e),
    }
}

/// Directed density `|E| / (|V|(|V|-1))`.
///
/// # Safety
/// `g` must be a live graph handle; `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn bn_graph_directed_density(g: *const BnGraph, out: *mut f64) -> BnStatus {
    let Some(graph) = g.as_ref() else {
        return fail_null("graph");
    };
    match graph.0.directed_density() {
        Ok(v) => write_f64(out, v),
        Err(e) => fail(e),
    }
}

/// Mean shortest-path hop count over reachable ordered pairs.
///
/// # Safety
/// `g` must be a live graph handle; `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn bn_graph_average_path_length(
    g: *const BnGraph,
    out: *mut f64,
) -> BnStatus {
    let Some(graph) = g.as_ref() else {
        return fail_null("graph");
    };
    match graph.0.average_path_length() {
        Ok(v) => write_f64(out, v),
        Err(e) => fail(e),
    }
}

unsafe fn open_reader(path: *const c_char) -> Result<BufReader<File>, BnStatus> {
    let path = cstr_arg(path, "path")?;
    File::open(Path::new(path)).map(BufReader::new).map_err(|e| {
        set_error(format!("cannot open {path}: {e}"));
        BnStatus::IoError
    })
}

unsafe fn open_writer(path: *const c_char) -> Result<BufWriter<File>, BnStatus> {
    let path = cstr_arg(path, "path")?;
    File::create(Path::new(path)).map(BufWriter::new).map_err(|e| {
        set_error(format!("cannot create {path}: {e}"));
        BnStatus::IoError
    })
}

/// Reads a `source<TAB>target<TAB>weight` edge-list file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must point to a
/// writable `BnGraph*` slot.
#[no_mangle]
pub unsafe extern "C" fn bn_graph_read_edgelist(
    path: *const c_char,
    out: *mut *mut BnGraph,
) -> BnStatus {
    if out.is_null() {
        return fail_null("out");
    }
    let reader = match open_reader(path) {
        Ok(r) => r,
        Err(status) => return status,
    };
    match ForwardGraph::read_edgelist(reader) {
        Ok(g) => {
            *out = Box::into_raw(Box::new(BnGraph(g)));
            BnStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Writes the graph as an edge-list file.
///
/// # Safety
/// `g` must be a live graph handle; `path` must be a valid NUL-terminated
/// string.
#[no_mangle]
pub unsafe extern "C" fn bn_graph_write_edgelist(
    g: *const BnGraph,
    path: *const c_char,
) -> BnStatus {
    let Some(graph) = g.as_ref() else {
        return fail_null("graph");
    };
    let writer = match open_writer(path) {
        Ok(w) => w,
        Err(status) => return status,
    };
    match graph.0.write_edgelist(writer) {
        Ok(()) => BnStatus::Ok,
        Err(e) => fail(e),
    }
}

/// Reads a GEXF 1.2 file (directed graphs only).
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must point to a
/// writable `BnGraph*` slot.
#[no_mangle]
pub unsafe extern "C" fn bn_graph_read_gexf(
    path: *const c_char,
    out: *mut *mut BnGraph,
) -> BnStatus {
    if out.is_null() {
        return fail_null("out");
    }
    let reader = match open_reader(path) {
        Ok(r) => r,
        Err(status) => return status,
    };
    match read_gexf(reader) {
        Ok(doc) => {
            *out = Box::into_raw(Box::new(BnGraph(doc.graph)));
            BnStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Writes the graph as a GEXF 1.2 file (no annotations).
///
/// # Safety
/// `g` must be a live graph handle; `path` must be a valid NUL-terminated
/// string.
#[no_mangle]
pub unsafe extern "C" fn bn_graph_write_gexf(g: *const BnGraph, path: *const c_char) -> BnStatus {
    let Some(graph) = g.as_ref() else {
        return fail_null("graph");
    };
    let writer = match open_writer(path) {
        Ok(w) => w,
        Err(status) => return status,
    };
    match write_gexf(&graph.0, None, None, writer) {
        Ok(()) => BnStatus::Ok,
        Err(e) => fail(e),
    }
}

/// Builds a new graph without the listed channels; absent ids are ignored.
///
/// # Safety
/// `g` must be a live graph handle; `ids` must point to `len` valid
/// NUL-terminated strings; `out` must point to a writable `BnGraph*` slot.
#[no_mangle]
pub unsafe extern "C" fn bn_graph_remove_nodes(
    g: *const BnGraph,
    ids: *const *const c_char,
    len: usize,
    out: *mut *mut BnGraph,
) -> BnStatus {
    let Some(graph) = g.as_ref() else {
        return fail_null("graph");
    };
    if out.is_null() {
        return fail_null("out");
    }
    if len > 0 && ids.is_null() {
        return fail_null("ids");
    }
    let mut targets = Vec::with_capacity(len);
    for i in 0..len {
        let ptr = *ids.add(i);
        match cstr_arg(ptr, "ids entry") {
            Ok(s) => targets.push(s.to_string()),
            Err(status) => return status,
        }
    }
    match remove_nodes(&graph.0, &targets) {
        Ok(result) => {
            *out = Box::into_raw(Box::new(BnGraph(result.graph)));
            BnStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Writes the default bridge-score weights (10, 7, 7).
///
/// # Safety
/// All three pointers must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn bn_default_weights(
    w_indegree: *mut f64,
    w_eigenvector: *mut f64,
    w_clustering: *mut f64,
) -> BnStatus {
    if w_indegree.is_null() || w_eigenvector.is_null() || w_clustering.is_null() {
        return fail_null("weight output");
    }
    let w = bridgenet::bridge::default_weights();
    *w_indegree = w.indegree;
    *w_eigenvector = w.eigenvector;
    *w_clustering = w.clustering;
    BnStatus::Ok
}

/// Ranks every channel by bridge score. `damping` in `[0, 1)`; 0 disables
/// the teleport term. Free the result with [`bn_ranking_free`].
///
/// # Safety
/// `g` must be a live graph handle; `out` must point to a writable
/// `BnRanking*` slot.
#[no_mangle]
pub unsafe extern "C" fn bn_rank(
    g: *const BnGraph,
    w_indegree: f64,
    w_eigenvector: f64,
    w_clustering: f64,
    damping: f64,
    tolerance: f64,
    max_iterations: usize,
    out: *mut *mut BnRanking,
) -> BnStatus {
    let Some(graph) = g.as_ref() else {
        return fail_null("graph");
    };
    if out.is_null() {
        return fail_null("out");
    }
    let params = MetricParams {
        tolerance,
        max_iterations,
        damping,
    };
    let weights = WeightTriple::new(w_indegree, w_eigenvector, w_clustering);
    match rank(&graph.0, &weights, &params) {
        Ok(ranking) => {
            *out = Box::into_raw(Box::new(BnRanking(ranking)));
            BnStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// `r` must be a live ranking handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn bn_ranking_len(r: *const BnRanking) -> usize {
    r.as_ref().map_or(0, |ranking| ranking.0.entries.len())
}

/// Channel id at `index` in rank order, as a caller-owned string (release
/// with [`bn_string_free`]); null if out of range.
///
/// # Safety
/// `r` must be a live ranking handle or null.
#[no_mangle]
pub unsafe extern "C" fn bn_ranking_channel(r: *const BnRanking, index: usize) -> *mut c_char {
    let Some(ranking) = r.as_ref() else {
        return std::ptr::null_mut();
    };
    ranking
        .0
        .entries
        .get(index)
        .and_then(|e| CString::new(e.id.clone()).ok())
        .map_or(std::ptr::null_mut(), CString::into_raw)
}

/// Bridge score at `index` in rank order.
///
/// # Safety
/// `r` must be a live ranking handle; `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn bn_ranking_score(
    r: *const BnRanking,
    index: usize,
    out: *mut f64,
) -> BnStatus {
    let Some(ranking) = r.as_ref() else {
        return fail_null("ranking");
    };
    match ranking.0.entries.get(index) {
        Some(e) => write_f64(out, e.score),
        None => {
            set_error(format!(
                "index {index} out of range for ranking of {}",
                ranking.0.entries.len()
            ));
            BnStatus::OutOfRange
        }
    }
}

/// # Safety
/// `r` must be a pointer returned by [`bn_rank`], not yet freed; null is a
/// no-op.
#[no_mangle]
pub unsafe extern "C" fn bn_ranking_free(r: *mut BnRanking) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Louvain community detection on the undirected weighted projection.
/// Free the result with [`bn_partition_free`].
///
/// # Safety
/// `g` must be a live graph handle; `out` must point to a writable
/// `BnPartition*` slot.
#[no_mangle]
pub unsafe extern "C" fn bn_louvain(
    g: *const BnGraph,
    resolution: f64,
    seed: u64,
    out: *mut *mut BnPartition,
) -> BnStatus {
    let Some(graph) = g.as_ref() else {
        return fail_null("graph");
    };
    if out.is_null() {
        return fail_null("out");
    }
    match louvain(&graph.0, resolution, seed) {
        Ok(partition) => {
            *out = Box::into_raw(Box::new(BnPartition(partition)));
            BnStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// `p` must be a live partition handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn bn_partition_community_count(p: *const BnPartition) -> usize {
    p.as_ref().map_or(0, |partition| partition.0.community_count)
}

/// Modularity of the partition; NaN if `p` is null.
///
/// # Safety
/// `p` must be a live partition handle or null.
#[no_mangle]
pub unsafe extern "C" fn bn_partition_modularity(p: *const BnPartition) -> f64 {
    p.as_ref().map_or(f64::NAN, |partition| partition.0.modularity)
}

/// Community id of a channel, or -1 if the channel is not in the partition.
///
/// # Safety
/// `p` must be a live partition handle; `id` must be a valid NUL-terminated
/// string.
#[no_mangle]
pub unsafe extern "C" fn bn_partition_community_of(
    p: *const BnPartition,
    id: *const c_char,
) -> i64 {
    let Some(partition) = p.as_ref() else {
        return -1;
    };
    let Ok(id) = cstr_arg(id, "id") else {
        return -1;
    };
    let Ok(normalized) = bridgenet::graph::normalize_id(id) else {
        return -1;
    };
    partition
        .0
        .assignment
        .get(&normalized)
        .map_or(-1, |&c| c as i64)
}

/// # Safety
/// `p` must be a pointer returned by [`bn_louvain`], not yet freed; null is
/// a no-op.
#[no_mangle]
pub unsafe extern "C" fn bn_partition_free(p: *mut BnPartition) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}
