// SPDX-License-Identifier: Apache-2.0
//! C interface to snnmap.
//!
//! Objects cross the boundary as opaque handles created by a `*_parse`
//! function and released with the matching `*_free`. Every fallible call
//! returns an [`SnnmapStatus`]; on failure the message is available from
//! [`snnmap_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use snnmap::cli::exit_code;
use snnmap::graph::{compute_graph_stats, parse_snn_graph, SnnGraph};
use snnmap::sdfg::{check_deadlock, parse_sdfg, repetition_vector, self_timed_throughput_with, AnalysisOptions, Sdfg};
use snnmap::Error;

/// Result of every fallible call. The first four values match the exit
/// codes of the command-line tool.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnnmapStatus {
    Ok = 0,
    AnalysisFailed = 1,
    InvalidInput = 2,
    BudgetExceeded = 3,
    NullPointer = 4,
    InvalidUtf8 = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Parsed synchronous dataflow graph.
pub struct SnnmapSdfg {
    inner: Sdfg,
}

/// Parsed spiking neural network.
pub struct SnnmapNetwork {
    inner: SnnGraph,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SnnmapGraphStats {
    pub max_in_degree: f64,
    pub avg_in_degree: f64,
    pub max_out_degree: f64,
    pub avg_out_degree: f64,
    pub diameter: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SnnmapThroughput {
    /// Exact period is `period_time / period_iterations` time units.
    pub period_time: u64,
    pub period_iterations: u64,
    pub throughput: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(SnnmapStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match exit_code(&e) {
            1 => SnnmapStatus::AnalysisFailed,
            3 => SnnmapStatus::BudgetExceeded,
            _ => SnnmapStatus::InvalidInput,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SnnmapStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SnnmapStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SnnmapStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or a valid NUL-terminated string.
unsafe fn utf8<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(SnnmapStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(SnnmapStatus::InvalidUtf8, e.to_string()))
}

/// # Safety
/// `p` is null or points to a live `T`.
unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(SnnmapStatus::NullPointer, "null handle".into()))
}

fn out_ptr<T>(p: *mut T) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(SnnmapStatus::NullPointer, "null output pointer".into()))
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn snnmap_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn snnmap_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parse an SDFG document (TOML text).
///
/// # Safety
/// `text` is a NUL-terminated string; `out` is writable. On success `*out`
/// owns a handle to release with [`snnmap_sdfg_free`].
#[no_mangle]
pub unsafe extern "C" fn snnmap_sdfg_parse(text: *const c_char, out: *mut *mut SnnmapSdfg) -> SnnmapStatus {
    guard(|| {
        out_ptr(out)?;
        let g = parse_sdfg(utf8(text)?).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(SnnmapSdfg { inner: g }));
        Ok(())
    })
}

/// # Safety
/// `g` is null or a handle from [`snnmap_sdfg_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn snnmap_sdfg_free(g: *mut SnnmapSdfg) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of actors; 0 for a null handle.
///
/// # Safety
/// `g` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn snnmap_sdfg_actor_count(g: *const SnnmapSdfg) -> usize {
    g.as_ref().map_or(0, |g| g.inner.actors().len())
}

/// Write the repetition vector into `out[0..len]`. `len` must be at least
/// the actor count.
///
/// # Safety
/// `g` is a live handle; `out` points to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn snnmap_sdfg_repetition_vector(g: *const SnnmapSdfg, out: *mut u64, len: usize) -> SnnmapStatus {
    guard(|| {
        let g = handle(g)?;
        out_ptr(out)?;
        let q = repetition_vector(&g.inner).map_err(Error::from)?;
        if len < q.0.len() {
            return Err(Failure(
                SnnmapStatus::BufferTooSmall,
                format!("need room for {} entries, got {len}", q.0.len()),
            ));
        }
        std::slice::from_raw_parts_mut(out, q.0.len()).copy_from_slice(&q.0);
        Ok(())
    })
}

/// Set `*deadlock_free` to whether one iteration completes.
///
/// # Safety
/// `g` is a live handle; `deadlock_free` is writable.
#[no_mangle]
pub unsafe extern "C" fn snnmap_sdfg_check_deadlock(g: *const SnnmapSdfg, deadlock_free: *mut bool) -> SnnmapStatus {
    guard(|| {
        let g = handle(g)?;
        out_ptr(deadlock_free)?;
        *deadlock_free = check_deadlock(&g.inner).map_err(Error::from)?.is_ok();
        Ok(())
    })
}

/// Self-timed throughput with the capacities stored in the graph.
/// `state_budget` 0 selects the default.
///
/// # Safety
/// `g` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn snnmap_sdfg_throughput(
    g: *const SnnmapSdfg,
    state_budget: usize,
    out: *mut SnnmapThroughput,
) -> SnnmapStatus {
    guard(|| {
        let g = handle(g)?;
        out_ptr(out)?;
        let mut opts = AnalysisOptions::default();
        if state_budget > 0 {
            opts.state_budget = state_budget;
        }
        let r = self_timed_throughput_with(&g.inner, None, None, &opts).map_err(Error::from)?;
        *out = SnnmapThroughput {
            period_time: r.period_time,
            period_iterations: r.period_iterations,
            throughput: r.throughput,
        };
        Ok(())
    })
}

/// Parse an SNN graph document (TOML text).
///
/// # Safety
/// `text` is a NUL-terminated string; `out` is writable. Release the handle
/// with [`snnmap_network_free`].
#[no_mangle]
pub unsafe extern "C" fn snnmap_network_parse(text: *const c_char, out: *mut *mut SnnmapNetwork) -> SnnmapStatus {
    guard(|| {
        out_ptr(out)?;
        let g = parse_snn_graph(utf8(text)?).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(SnnmapNetwork { inner: g }));
        Ok(())
    })
}

/// # Safety
/// `g` is null or a handle from [`snnmap_network_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn snnmap_network_free(g: *mut SnnmapNetwork) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn snnmap_network_stats(g: *const SnnmapNetwork, out: *mut SnnmapGraphStats) -> SnnmapStatus {
    guard(|| {
        let g = handle(g)?;
        out_ptr(out)?;
        let s = compute_graph_stats(&g.inner);
        *out = SnnmapGraphStats {
            max_in_degree: s.max_in_degree,
            avg_in_degree: s.avg_in_degree,
            max_out_degree: s.max_out_degree,
            avg_out_degree: s.avg_out_degree,
            diameter: s.diameter,
        };
        Ok(())
    })
}

/// Run the full exploration described by the run config at `config_path`,
/// writing results to `out_dir` (null: the config's or the default).
/// `jobs` 0 uses every core.
///
/// # Safety
/// `config_path` is a NUL-terminated string; `out_dir` is null or one.
#[no_mangle]
pub unsafe extern "C" fn snnmap_explore(config_path: *const c_char, out_dir: *const c_char, jobs: usize) -> SnnmapStatus {
    guard(|| {
        let cfg = snnmap::cli::RunConfig::load(Path::new(utf8(config_path)?))?;
        let dir = if out_dir.is_null() { None } else { Some(utf8(out_dir)?) };
        let pool = rayon_pool(jobs)?;
        let code = pool.install(|| snnmap::cli::cmd_explore(&cfg, dir.map(Path::new)))?;
        if code == 3 {
            return Err(Failure(SnnmapStatus::BudgetExceeded, "state budget exceeded in some rounds".into()));
        }
        Ok(())
    })
}

fn rayon_pool(jobs: usize) -> Result<snnmap::cli::WorkerPool, Failure> {
    snnmap::cli::WorkerPool::new(jobs).map_err(|e| Failure(SnnmapStatus::InvalidInput, e))
}
