//! C ABI over `lgplate`.
//!
//! Objects are opaque handles created and destroyed by this library. Every
//! fallible call returns an [`LgStatus`]; on failure a description is kept
//! per thread and can be read with [`lgplate_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use lgplate::config::{parse_config, AnalysisConfig, JobKind};
use lgplate::jobs::{run_job, solve_config, SolveSummary};
use lgplate::postprocess::{center_node, nodal_deflection};
use lgplate::Error;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    InvalidArgument = 4,
    NonConvergence = 5,
    SolverFailure = 6,
    Io = 7,
    BufferTooSmall = 8,
    VerificationFailed = 9,
    Panic = 10,
    Internal = 11,
}

/// Parsed and validated analysis configuration.
pub struct LgConfig(AnalysisConfig);

/// Converged solution with its summary.
pub struct LgSolution {
    n_nodes: usize,
    n_layers: usize,
    center: usize,
    nodes: Vec<[f64; 2]>,
    deflection: Vec<Vec<f64>>,
    summary: SolveSummary,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(e: &Error) -> LgStatus {
    match e {
        Error::Config(_) => LgStatus::Config,
        Error::InvalidArgument(_) | Error::InvalidMaterial(_) | Error::DimensionMismatch { .. } => LgStatus::InvalidArgument,
        Error::NonConvergence { .. } | Error::Divergence { .. } | Error::Unconverged => LgStatus::NonConvergence,
        Error::SolverFailure(_) | Error::SingularJacobian { .. } => LgStatus::SolverFailure,
        Error::Io { .. } => LgStatus::Io,
        _ => LgStatus::Internal,
    }
}

fn guard(f: impl FnOnce() -> Result<(), LgStatus>) -> LgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LgStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            LgStatus::Panic
        }
    }
}

fn fail(e: Error) -> LgStatus {
    set_error(e.to_string());
    status_of(&e)
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, LgStatus> {
    if p.is_null() {
        set_error("null string argument");
        return Err(LgStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        LgStatus::InvalidUtf8
    })
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, LgStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("null handle");
        LgStatus::NullPointer
    })
}

unsafe fn out_ptr<'a, T>(p: *mut T) -> Result<&'a mut T, LgStatus> {
    p.as_mut().ok_or_else(|| {
        set_error("null output pointer");
        LgStatus::NullPointer
    })
}

/// Message of the last failed call on this thread, or NULL.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lgplate_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lgplate_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parse a TOML configuration.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lgplate_config_parse(toml: *const c_char, out: *mut *mut LgConfig) -> LgStatus {
    guard(|| {
        let out = out_ptr(out)?;
        *out = std::ptr::null_mut();
        let cfg = parse_config(text(toml)?).map_err(fail)?;
        *out = Box::into_raw(Box::new(LgConfig(cfg)));
        Ok(())
    })
}

/// # Safety
/// `config` must come from [`lgplate_config_parse`] and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn lgplate_config_free(config: *mut LgConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Set the shear modulus (MPa) of every interlayer.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lgplate_config_set_interlayer_shear(config: *mut LgConfig, shear: f64) -> LgStatus {
    guard(|| {
        let cfg = out_ptr(config)?;
        let mut next = cfg.0.clone();
        next.set_interlayer_shear(shear);
        next.validate().map_err(fail)?;
        cfg.0 = next;
        Ok(())
    })
}

/// Set the uniform pressure (MPa).
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lgplate_config_set_pressure(config: *mut LgConfig, pressure: f64) -> LgStatus {
    guard(|| {
        let cfg = out_ptr(config)?;
        if !pressure.is_finite() {
            set_error("pressure must be finite");
            return Err(LgStatus::InvalidArgument);
        }
        cfg.0.load.pressure = lgplate::config::Stress(pressure);
        Ok(())
    })
}

/// Resolved configuration (all defaults filled) as TOML; release it with
/// [`lgplate_string_free`].
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lgplate_config_to_toml(config: *const LgConfig, out: *mut *mut c_char) -> LgStatus {
    guard(|| {
        let out = out_ptr(out)?;
        *out = std::ptr::null_mut();
        let cfg = handle(config)?;
        let s = CString::new(cfg.0.to_toml()).map_err(|_| {
            set_error("configuration contains NUL");
            LgStatus::Internal
        })?;
        *out = s.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn lgplate_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Solve the configured plate.
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lgplate_solve(config: *const LgConfig, out: *mut *mut LgSolution) -> LgStatus {
    guard(|| {
        let out = out_ptr(out)?;
        *out = std::ptr::null_mut();
        let cfg = handle(config)?;
        let (problem, state, field) = solve_config(&cfg.0, None).map_err(fail)?;
        let n_layers = problem.laminate.n_layers();
        let solution = LgSolution {
            n_nodes: problem.mesh.n_nodes(),
            n_layers,
            center: center_node(&problem),
            nodes: problem.mesh.nodes.clone(),
            deflection: (0..n_layers).map(|l| nodal_deflection(&problem, &state, l)).collect(),
            summary: SolveSummary::from_solution(&problem, &state, &field),
        };
        *out = Box::into_raw(Box::new(solution));
        Ok(())
    })
}

/// # Safety
/// `solution` must come from [`lgplate_solve`] and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn lgplate_solution_free(solution: *mut LgSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Number of mesh nodes; 0 for NULL.
///
/// # Safety
/// `solution` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn lgplate_solution_n_nodes(solution: *const LgSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.n_nodes)
}

/// Number of layers; 0 for NULL.
///
/// # Safety
/// `solution` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn lgplate_solution_n_layers(solution: *const LgSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.n_layers)
}

/// Deflection of the loaded layer at the plate centre (mm).
///
/// # Safety
/// `solution` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lgplate_solution_center_deflection(solution: *const LgSolution, out: *mut f64) -> LgStatus {
    guard(|| {
        let s = handle(solution)?;
        *out_ptr(out)? = s.deflection[0][s.center];
        Ok(())
    })
}

/// Newton iterations and final residual of the solve.
///
/// # Safety
/// `solution` must be a live handle; `iterations` and `eta` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn lgplate_solution_convergence(
    solution: *const LgSolution,
    iterations: *mut usize,
    eta: *mut f64,
) -> LgStatus {
    guard(|| {
        let s = handle(solution)?;
        *out_ptr(iterations)? = s.summary.iterations;
        *out_ptr(eta)? = s.summary.eta;
        Ok(())
    })
}

/// Copy the nodal deflections of `layer` into `buffer` of length `len`
/// (at least [`lgplate_solution_n_nodes`]).
///
/// # Safety
/// `solution` must be a live handle and `buffer` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn lgplate_solution_deflection(
    solution: *const LgSolution,
    layer: usize,
    buffer: *mut f64,
    len: usize,
) -> LgStatus {
    guard(|| {
        let s = handle(solution)?;
        if layer >= s.n_layers {
            set_error(format!("layer {layer} out of range ({} layers)", s.n_layers));
            return Err(LgStatus::InvalidArgument);
        }
        if buffer.is_null() {
            set_error("null buffer");
            return Err(LgStatus::NullPointer);
        }
        if len < s.n_nodes {
            set_error(format!("buffer holds {len} values, need {}", s.n_nodes));
            return Err(LgStatus::BufferTooSmall);
        }
        std::slice::from_raw_parts_mut(buffer, s.n_nodes).copy_from_slice(&s.deflection[layer]);
        Ok(())
    })
}

/// Coordinates `(x, y)` of node `node` in mm.
///
/// # Safety
/// `solution` must be a live handle; `x` and `y` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn lgplate_solution_node(solution: *const LgSolution, node: usize, x: *mut f64, y: *mut f64) -> LgStatus {
    guard(|| {
        let s = handle(solution)?;
        let p = s.nodes.get(node).ok_or_else(|| {
            set_error(format!("node {node} out of range"));
            LgStatus::InvalidArgument
        })?;
        *out_ptr(x)? = p[0];
        *out_ptr(y)? = p[1];
        Ok(())
    })
}

/// Largest `|σ|` over the reported stress fibres (MPa).
///
/// # Safety
/// `solution` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lgplate_solution_peak_stress(solution: *const LgSolution, out: *mut f64) -> LgStatus {
    guard(|| {
        let s = handle(solution)?;
        *out_ptr(out)? = s.summary.peak_stress();
        Ok(())
    })
}

/// Run the configured job and write its artifacts under `out_dir`.
/// Returns [`LgStatus::VerificationFailed`] when a check did not pass.
///
/// # Safety
/// `config` must be a live handle and `out_dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lgplate_run_job(config: *const LgConfig, out_dir: *const c_char) -> LgStatus {
    guard(|| {
        let cfg = handle(config)?;
        let dir = text(out_dir)?;
        let report = run_job(&cfg.0, Path::new(dir)).map_err(fail)?;
        if !report.passed {
            set_error(format!("{} job: verification failed", report.job));
            return Err(LgStatus::VerificationFailed);
        }
        Ok(())
    })
}

/// Job kind of a configuration: 0 solve, 1 verify, 2 sweep, 3 convergence, 4 efft; -1 for NULL.
///
/// # Safety
/// `config` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn lgplate_config_job(config: *const LgConfig) -> i32 {
    match config.as_ref().map(|c| c.0.job) {
        Some(JobKind::Solve) => 0,
        Some(JobKind::Verify) => 1,
        Some(JobKind::Sweep) => 2,
        Some(JobKind::Convergence) => 3,
        Some(JobKind::Efft) => 4,
        None => -1,
    }
}
