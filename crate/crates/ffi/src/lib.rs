//! C interface to `rfmass`.
//!
//! Handles are opaque and owned by the caller, who releases them with the
//! matching `*_free`. Every fallible call returns an [`RfmStatus`]; on
//! failure the message is kept per thread and read back with
//! [`rfm_last_error`]. Panics are caught at the boundary and reported as
//! [`RfmStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use rfmass::diagnostics::{adm_mass, hawking_mass};
use rfmass::flow::{evolve, EvolveOptions, FlowState};
use rfmass::harness::{run, write_outputs, ExperimentConfig, GridConfig, RunStatus};
use rfmass::initialdata::{build, InitialDataSpec};
use rfmass::io::{read_snapshot, write_snapshot};
use rfmass::{Error, WarpedMetric};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RfmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    CurvatureBlowUp = 4,
    AsymptoticsViolated = 5,
    Io = 6,
    Numerical = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

impl From<&Error> for RfmStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::CurvatureBlowUp { .. } => Self::CurvatureBlowUp,
            Error::AsymptoticsViolated { .. } => Self::AsymptoticsViolated,
            Error::Io(_) => Self::Io,
            Error::Config(_)
            | Error::Parse(_)
            | Error::Json(_)
            | Error::AmplitudeTooLarge(_)
            | Error::InvalidGrid(_)
            | Error::GridTooCoarse { .. }
            | Error::UnsupportedDimension(_) => Self::Config,
            Error::InvalidArgument(_) | Error::MismatchedGrids | Error::WrongDimension { .. } => Self::InvalidArgument,
            _ => Self::Numerical,
        }
    }
}

/// A metric sampled on a radial grid.
pub struct RfmMetric(WarpedMetric);

/// A Ricci flow in progress.
pub struct RfmFlow(FlowState);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: RfmStatus, message: impl Into<String>) -> RfmStatus {
    set_error(message.into());
    status
}

fn fail_with(e: &Error) -> RfmStatus {
    fail(RfmStatus::from(e), e.to_string())
}

/// Run `body` with the panic guard and error bookkeeping.
fn guard(body: impl FnOnce() -> RfmStatus) -> RfmStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(RfmStatus::Panic, format!("panic: {msg}"))
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, RfmStatus> {
    if p.is_null() {
        return Err(fail(RfmStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(RfmStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn put<T>(out: *mut T, value: T) {
    if !out.is_null() {
        out.write(value);
    }
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

macro_rules! try_core {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return fail_with(&e),
        }
    };
}

macro_rules! handle {
    ($p:expr, $what:literal) => {
        match $p.as_ref() {
            Some(h) => h,
            None => return fail(RfmStatus::NullPointer, concat!($what, " is null")),
        }
    };
}

/// Version string of the library; static, never freed.
#[no_mangle]
pub extern "C" fn rfm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy the calling thread's last error message into `buf` (NUL terminated,
/// truncated to `capacity`). Returns the full message length without the
/// terminator, or 0 when there is no error.
///
/// # Safety
/// `buf` is null or points to `capacity` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rfm_last_error(buf: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && capacity > 0 {
                let n = bytes.len().min(capacity - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

#[no_mangle]
pub extern "C" fn rfm_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Build initial data from its JSON description (the `initial` table of an
/// experiment, e.g. `{"kind":"schwarzschild_slice","n":3,"amplitude":1}`)
/// on a compactified grid. Non-positive `r_min`, `r_max` or `scale` take
/// the defaults.
///
/// # Safety
/// `spec_json` is a NUL-terminated string; `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rfm_metric_new(
    spec_json: *const c_char,
    nodes: usize,
    r_min: f64,
    r_max: f64,
    scale: f64,
    out: *mut *mut RfmMetric,
) -> RfmStatus {
    guard(|| {
        if out.is_null() {
            return fail(RfmStatus::NullPointer, "out is null");
        }
        let text = try_status!(str_arg(spec_json, "spec_json"));
        let spec: InitialDataSpec = try_core!(serde_json::from_str(text).map_err(Error::from));
        let mut grid = GridConfig { nodes, ..GridConfig::default() };
        if r_min > 0.0 {
            grid.r_min = r_min;
        }
        if r_max > 0.0 {
            grid.r_max = r_max;
        }
        if scale > 0.0 {
            grid.scale = scale;
        }
        let metric = try_core!(grid.build().and_then(|g| build(&spec, g)));
        *out = Box::into_raw(Box::new(RfmMetric(metric)));
        RfmStatus::Ok
    })
}

/// Load a metric snapshot (CSV with optional JSON sidecar).
///
/// # Safety
/// `path` is a NUL-terminated string; `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rfm_metric_read(path: *const c_char, out: *mut *mut RfmMetric) -> RfmStatus {
    guard(|| {
        if out.is_null() {
            return fail(RfmStatus::NullPointer, "out is null");
        }
        let path = try_status!(str_arg(path, "path"));
        let snap = try_core!(read_snapshot(&PathBuf::from(path)));
        *out = Box::into_raw(Box::new(RfmMetric(snap.metric)));
        RfmStatus::Ok
    })
}

/// # Safety
/// `metric` is a live handle; `path` is a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rfm_metric_write(metric: *const RfmMetric, path: *const c_char, time: f64) -> RfmStatus {
    guard(|| {
        let m = handle!(metric, "metric");
        let path = try_status!(str_arg(path, "path"));
        try_core!(write_snapshot(&PathBuf::from(path), &m.0, time));
        RfmStatus::Ok
    })
}

/// Number of grid nodes, 0 for a null handle.
///
/// # Safety
/// `metric` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rfm_metric_nodes(metric: *const RfmMetric) -> usize {
    metric.as_ref().map_or(0, |m| m.0.len())
}

/// Copy radii and the warping functions `a`, `b` into caller buffers of
/// `len` entries each; any of them may be null.
///
/// # Safety
/// `metric` is a live handle; non-null buffers hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rfm_metric_samples(
    metric: *const RfmMetric,
    r: *mut f64,
    a: *mut f64,
    b: *mut f64,
    len: usize,
) -> RfmStatus {
    guard(|| {
        let m = handle!(metric, "metric");
        let n = m.0.len();
        if len < n {
            return fail(RfmStatus::BufferTooSmall, format!("buffers hold {len} entries, need {n}"));
        }
        for (dst, src) in [(r, m.0.grid().radii()), (a, m.0.a()), (b, m.0.b())] {
            if !dst.is_null() {
                ptr::copy_nonoverlapping(src.as_ptr(), dst, n);
            }
        }
        RfmStatus::Ok
    })
}

/// Extrapolated ADM mass and its uncertainty.
///
/// # Safety
/// `metric` is a live handle; `mass` and `uncertainty` are null or valid.
#[no_mangle]
pub unsafe extern "C" fn rfm_metric_adm_mass(
    metric: *const RfmMetric,
    mass: *mut f64,
    uncertainty: *mut f64,
) -> RfmStatus {
    guard(|| {
        let m = handle!(metric, "metric");
        let est = try_core!(adm_mass(&m.0));
        put(mass, est.extrapolated);
        put(uncertainty, est.uncertainty);
        RfmStatus::Ok
    })
}

/// # Safety
/// `metric` is a live handle; `out` is null or valid.
#[no_mangle]
pub unsafe extern "C" fn rfm_metric_hawking_mass(metric: *const RfmMetric, r: f64, out: *mut f64) -> RfmStatus {
    guard(|| {
        let m = handle!(metric, "metric");
        put(out, try_core!(hawking_mass(&m.0, r)));
        RfmStatus::Ok
    })
}

/// # Safety
/// `metric` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rfm_metric_free(metric: *mut RfmMetric) {
    if !metric.is_null() {
        drop(Box::from_raw(metric));
    }
}

/// Start a flow at `t = 0` from a copy of `metric`.
///
/// # Safety
/// `metric` is a live handle; `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rfm_flow_new(
    metric: *const RfmMetric,
    blowup_factor: f64,
    out: *mut *mut RfmFlow,
) -> RfmStatus {
    guard(|| {
        let m = handle!(metric, "metric");
        if out.is_null() {
            return fail(RfmStatus::NullPointer, "out is null");
        }
        let state = try_core!(FlowState::new(m.0.clone(), blowup_factor));
        *out = Box::into_raw(Box::new(RfmFlow(state)));
        RfmStatus::Ok
    })
}

/// Advance to `t_final`. On failure the flow keeps the last good state.
///
/// # Safety
/// `flow` is a live handle.
#[no_mangle]
pub unsafe extern "C" fn rfm_flow_evolve(flow: *mut RfmFlow, t_final: f64, cfl_safety: f64) -> RfmStatus {
    guard(|| {
        let f = match flow.as_mut() {
            Some(f) => f,
            None => return fail(RfmStatus::NullPointer, "flow is null"),
        };
        let options = EvolveOptions { t_final, cfl_safety, record_every: usize::MAX };
        let state = f.0.clone();
        match evolve(state, &options, &mut ()) {
            Ok(state) => {
                f.0 = state;
                RfmStatus::Ok
            }
            Err(failure) => {
                let status = fail_with(&failure.error);
                f.0 = failure.state;
                status
            }
        }
    })
}

/// Current flow time, NaN for a null handle.
///
/// # Safety
/// `flow` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rfm_flow_time(flow: *const RfmFlow) -> f64 {
    flow.as_ref().map_or(f64::NAN, |f| f.0.time())
}

/// # Safety
/// `flow` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rfm_flow_steps(flow: *const RfmFlow) -> u64 {
    flow.as_ref().map_or(0, |f| f.0.step_count())
}

/// New metric handle holding a copy of the current metric.
///
/// # Safety
/// `flow` is a live handle; `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rfm_flow_metric(flow: *const RfmFlow, out: *mut *mut RfmMetric) -> RfmStatus {
    guard(|| {
        let f = handle!(flow, "flow");
        if out.is_null() {
            return fail(RfmStatus::NullPointer, "out is null");
        }
        *out = Box::into_raw(Box::new(RfmMetric(f.0.metric().clone())));
        RfmStatus::Ok
    })
}

/// # Safety
/// `flow` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rfm_flow_free(flow: *mut RfmFlow) {
    if !flow.is_null() {
        drop(Box::from_raw(flow));
    }
}

/// Run an experiment given as TOML. With a non-null `output_dir` the run
/// artifacts are written there. `summary_json`, when non-null, receives the
/// run summary as JSON, released with [`rfm_string_free`]. A run that stops
/// early still fills the summary and reports its status.
///
/// # Safety
/// `config_toml` is a NUL-terminated string; `output_dir` is null or one;
/// `summary_json` is null or valid.
#[no_mangle]
pub unsafe extern "C" fn rfm_run_toml(
    config_toml: *const c_char,
    output_dir: *const c_char,
    summary_json: *mut *mut c_char,
) -> RfmStatus {
    guard(|| {
        if !summary_json.is_null() {
            *summary_json = ptr::null_mut();
        }
        let text = try_status!(str_arg(config_toml, "config_toml"));
        let config = try_core!(ExperimentConfig::from_toml(text));
        let outcome = try_core!(run(&config));
        if !output_dir.is_null() {
            let dir = try_status!(str_arg(output_dir, "output_dir"));
            try_core!(write_outputs(&config, &outcome, &PathBuf::from(dir)));
        }
        if !summary_json.is_null() {
            let json = try_core!(serde_json::to_string(&outcome.summary).map_err(Error::from));
            *summary_json = CString::new(json).map_or(ptr::null_mut(), CString::into_raw);
        }
        match (&outcome.status, &outcome.failure) {
            (RunStatus::Completed, _) => RfmStatus::Ok,
            (RunStatus::CurvatureBlowUp, f) => {
                fail(RfmStatus::CurvatureBlowUp, f.as_ref().map_or(String::new(), |f| f.message.clone()))
            }
            (RunStatus::AsymptoticsViolated, f) => {
                fail(RfmStatus::AsymptoticsViolated, f.as_ref().map_or(String::new(), |f| f.message.clone()))
            }
            (RunStatus::Failed, f) => {
                fail(RfmStatus::Numerical, f.as_ref().map_or(String::new(), |f| f.message.clone()))
            }
        }
    })
}

/// # Safety
/// `s` is null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rfm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
