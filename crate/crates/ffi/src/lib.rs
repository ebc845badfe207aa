//! C ABI for stencil-lab.
//!
//! Objects are returned through opaque handles that the caller releases
//! with the matching `*_free` function. Every fallible call returns an
//! [`SlStatus`]; on failure `sl_last_error()` describes the problem until
//! the next failing call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use stencil_lab::analysis::SweepRecord;
use stencil_lab::basis::{basis_size, LinearOperator, RadialKernel};
use stencil_lab::bench::config::generate_nodes;
use stencil_lab::bench::{self, ExperimentConfig, Generator, RunOptions};
use stencil_lab::geometry::{Domain, Shape};
use stencil_lab::neighbors::{stencil_of, SpatialIndex};
use stencil_lab::nodegen::{quality, NodeRole, NodeSet};
use stencil_lab::weights::{build_diff_matrix, DiffWeights};
use stencil_lab::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad UTF-8, bad enum value or a buffer that is too small.
    InvalidArgument = 2,
    Config = 3,
    Input = 4,
    SingularLocal = 5,
    SingularSystem = 6,
    NoConvergence = 7,
    Io = 8,
    Parse = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlGenerator {
    AdvancingFront = 0,
    Halton = 1,
    Polar = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SlQuality {
    pub rho: f64,
    pub delta: f64,
    pub gamma: f64,
}

/// One row of a stencil-size sweep; failed solves have NaN fields and
/// `ok == 0`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SlSweepRecord {
    pub n: usize,
    pub e_max_poiss: f64,
    pub e_avg_poiss: f64,
    pub e_max_lap: f64,
    pub e_avg_lap: f64,
    pub dn_poiss: f64,
    pub dn_lap: f64,
    pub wall_time_s: f64,
    /// NaN unless the IMEX indicator was requested.
    pub imex_avg: f64,
    pub ok: i32,
}

impl From<&SweepRecord> for SlSweepRecord {
    fn from(r: &SweepRecord) -> Self {
        SlSweepRecord {
            n: r.n,
            e_max_poiss: r.e_max_poiss,
            e_avg_poiss: r.e_avg_poiss,
            e_max_lap: r.e_max_lap,
            e_avg_lap: r.e_avg_lap,
            dn_poiss: r.dn_poiss,
            dn_lap: r.dn_lap,
            wall_time_s: r.wall_time_s,
            imex_avg: r.imex_avg.unwrap_or(f64::NAN),
            ok: r.is_ok() as i32,
        }
    }
}

/// A generated node set.
pub struct SlNodeSet {
    nodes: NodeSet,
    domain: Domain,
}

/// Differentiation weights, one row per node, in CSR layout.
pub struct SlWeights {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

/// Records of an executed sweep.
pub struct SlRun {
    records: Vec<SlSweepRecord>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SlStatus {
    match e {
        Error::Input(_) => SlStatus::Input,
        Error::Config(_) => SlStatus::Config,
        Error::SingularLocal { .. } | Error::WeightFailures(_) => SlStatus::SingularLocal,
        Error::SingularSystem(_) => SlStatus::SingularSystem,
        Error::NoConvergence { .. } => SlStatus::NoConvergence,
        Error::Io(_) => SlStatus::Io,
        Error::Parse(_) => SlStatus::Parse,
        Error::Stage { source, .. } => status_of(source),
    }
}

struct Failure(SlStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SlStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SlStatus::Panic
        }
    }
}

fn null() -> Failure {
    Failure(SlStatus::NullPointer, "null pointer argument".into())
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(SlStatus::InvalidArgument, msg.into())
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid("string is not valid UTF-8"))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(null)
}

unsafe fn out_slice<'a, T>(p: *mut T, len: usize, need: usize) -> Result<&'a mut [T], Failure> {
    if p.is_null() {
        return Err(null());
    }
    if len < need {
        return Err(invalid(format!("buffer holds {len} entries, {need} needed")));
    }
    Ok(std::slice::from_raw_parts_mut(p, need))
}

fn parse_domain(s: &str) -> Result<Domain, Failure> {
    if s.trim_start().starts_with('{') {
        let shape: Shape = serde_json::from_str(s).map_err(|e| Failure(SlStatus::Parse, e.to_string()))?;
        Ok(Domain::new(shape)?)
    } else {
        Ok(Domain::named(s)?)
    }
}

/// Message of the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Generates nodes in `domain`: a name (`disc`, `ball`, ...) or a JSON shape
/// description such as `{"shape":"disc","center":[0,0],"radius":1}`.
/// `generator` is an [`SlGenerator`] value.
///
/// # Safety
/// `domain` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_nodes_generate(
    domain: *const c_char,
    h: f64,
    seed: u64,
    generator: u32,
    out: *mut *mut SlNodeSet,
) -> SlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let d = parse_domain(text(domain)?)?;
        let g = match generator {
            x if x == SlGenerator::AdvancingFront as u32 => Generator::AdvancingFront,
            x if x == SlGenerator::Halton as u32 => Generator::Halton,
            x if x == SlGenerator::Polar as u32 => Generator::Polar,
            other => return Err(invalid(format!("unknown generator {other}"))),
        };
        let nodes = generate_nodes(&d, g, h, seed)?;
        *out = Box::into_raw(Box::new(SlNodeSet { nodes, domain: d }));
        Ok(())
    })
}

/// # Safety
/// `nodes` must come from `sl_nodes_generate` (or be null).
#[no_mangle]
pub unsafe extern "C" fn sl_nodes_free(nodes: *mut SlNodeSet) {
    if !nodes.is_null() {
        drop(Box::from_raw(nodes));
    }
}

/// Number of nodes, 0 for a null handle.
///
/// # Safety
/// `nodes` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sl_nodes_len(nodes: *const SlNodeSet) -> usize {
    nodes.as_ref().map_or(0, |n| n.nodes.len())
}

/// Spatial dimension, 0 for a null handle.
///
/// # Safety
/// `nodes` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sl_nodes_dim(nodes: *const SlNodeSet) -> usize {
    nodes.as_ref().map_or(0, |n| n.nodes.dim)
}

/// Copies positions row-major (`len * dim` values) into `buf`.
///
/// # Safety
/// `buf` must point to `buf_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sl_nodes_positions(nodes: *const SlNodeSet, buf: *mut f64, buf_len: usize) -> SlStatus {
    guard(|| {
        let n = handle(nodes)?;
        let dim = n.nodes.dim;
        let out = out_slice(buf, buf_len, n.nodes.len() * dim)?;
        for (chunk, p) in out.chunks_mut(dim).zip(&n.nodes.positions) {
            chunk.copy_from_slice(&p[..dim]);
        }
        Ok(())
    })
}

/// Writes 1 for boundary nodes and 0 for interior nodes.
///
/// # Safety
/// `buf` must point to `buf_len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sl_nodes_boundary_mask(nodes: *const SlNodeSet, buf: *mut u8, buf_len: usize) -> SlStatus {
    guard(|| {
        let n = handle(nodes)?;
        let out = out_slice(buf, buf_len, n.nodes.len())?;
        for (o, r) in out.iter_mut().zip(&n.nodes.roles) {
            *o = (*r != NodeRole::Interior) as u8;
        }
        Ok(())
    })
}

/// Fill distance, separation distance and their ratio, estimated with
/// `probe_density^dim` probes.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_nodes_quality(nodes: *const SlNodeSet, probe_density: usize, out: *mut SlQuality) -> SlStatus {
    guard(|| {
        let n = handle(nodes)?;
        if out.is_null() {
            return Err(null());
        }
        let q = quality(&n.nodes, &n.domain, probe_density)?;
        *out = SlQuality { rho: q.rho, delta: q.delta, gamma: q.gamma };
        Ok(())
    })
}

/// Weights of `op` (`laplacian`, `identity`, `L1`..`L5`) on the `n`
/// nearest neighbours of every node, with kernel `kernel` (`phs3`,
/// `gauss:1`, ...) and monomials up to degree `m`.
///
/// # Safety
/// `op` and `kernel` must be NUL-terminated strings, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_weights_compute(
    nodes: *const SlNodeSet,
    op: *const c_char,
    kernel: *const c_char,
    m: u32,
    n: usize,
    out: *mut *mut SlWeights,
) -> SlStatus {
    guard(|| {
        let ns = handle(nodes)?;
        if out.is_null() {
            return Err(null());
        }
        let op = LinearOperator::named(text(op)?, ns.nodes.dim)?;
        let kernel: RadialKernel = text(kernel)?.parse()?;
        let need = basis_size(m, ns.nodes.dim);
        if n < need {
            return Err(invalid(format!("stencil size {n} is below the {need} monomials of degree {m}")));
        }
        let index = SpatialIndex::build(&ns.nodes)?;
        let stencils = (0..ns.nodes.len()).map(|c| stencil_of(&index, c, n)).collect::<Result<Vec<_>, _>>()?;
        let w: DiffWeights = build_diff_matrix(&ns.nodes, &stencils, &kernel, m, &op)?;
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut values = Vec::new();
        for row in &w.rows {
            cols.extend_from_slice(&row.members);
            values.extend_from_slice(&row.weights);
            row_ptr.push(cols.len());
        }
        *out = Box::into_raw(Box::new(SlWeights { row_ptr, cols, values }));
        Ok(())
    })
}

/// # Safety
/// `weights` must come from `sl_weights_compute` (or be null).
#[no_mangle]
pub unsafe extern "C" fn sl_weights_free(weights: *mut SlWeights) {
    if !weights.is_null() {
        drop(Box::from_raw(weights));
    }
}

/// Number of stored weights, 0 for a null handle.
///
/// # Safety
/// `weights` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sl_weights_nnz(weights: *const SlWeights) -> usize {
    weights.as_ref().map_or(0, |w| w.values.len())
}

/// Number of rows, 0 for a null handle.
///
/// # Safety
/// `weights` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sl_weights_rows(weights: *const SlWeights) -> usize {
    weights.as_ref().map_or(0, |w| w.row_ptr.len() - 1)
}

/// Copies the CSR arrays: `row_ptr` (rows + 1), `cols` and `values` (nnz).
///
/// # Safety
/// Each buffer must hold the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn sl_weights_csr(
    weights: *const SlWeights,
    row_ptr: *mut usize,
    row_ptr_len: usize,
    cols: *mut usize,
    values: *mut f64,
    nnz_len: usize,
) -> SlStatus {
    guard(|| {
        let w = handle(weights)?;
        out_slice(row_ptr, row_ptr_len, w.row_ptr.len())?.copy_from_slice(&w.row_ptr);
        out_slice(cols, nnz_len, w.cols.len())?.copy_from_slice(&w.cols);
        out_slice(values, nnz_len, w.values.len())?.copy_from_slice(&w.values);
        Ok(())
    })
}

/// Executes a sweep described by a TOML or JSON configuration in memory;
/// nothing is written to disk.
///
/// # Safety
/// `config` must be a NUL-terminated string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_sweep_run(config: *const c_char, out: *mut *mut SlRun) -> SlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let c = ExperimentConfig::parse(text(config)?)?;
        let outcome = bench::execute(&c, None, false)?;
        let records = outcome
            .records()
            .ok_or_else(|| invalid("configuration describes a convergence study, not a sweep"))?
            .iter()
            .map(SlSweepRecord::from)
            .collect();
        *out = Box::into_raw(Box::new(SlRun { records }));
        Ok(())
    })
}

/// # Safety
/// `run` must come from `sl_sweep_run` (or be null).
#[no_mangle]
pub unsafe extern "C" fn sl_run_free(run: *mut SlRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Number of records, 0 for a null handle.
///
/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sl_run_len(run: *const SlRun) -> usize {
    run.as_ref().map_or(0, |r| r.records.len())
}

/// Copies the records into `buf`.
///
/// # Safety
/// `buf` must point to `buf_len` writable records.
#[no_mangle]
pub unsafe extern "C" fn sl_run_records(run: *const SlRun, buf: *mut SlSweepRecord, buf_len: usize) -> SlStatus {
    guard(|| {
        let r = handle(run)?;
        out_slice(buf, buf_len, r.records.len())?.copy_from_slice(&r.records);
        Ok(())
    })
}

/// Runs a configuration file like `stencil-lab run --config`, writing CSV
/// and manifest into the configured output directory.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sl_run_config_file(path: *const c_char, dump_system: bool) -> SlStatus {
    guard(|| {
        let c = ExperimentConfig::load(std::path::Path::new(text(path)?))?;
        bench::run(&c, &RunOptions { dump_system, verbose: false })?;
        Ok(())
    })
}
