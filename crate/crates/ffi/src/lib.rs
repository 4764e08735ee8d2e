//! C ABI over `crossdiff`.
//!
//! Objects are opaque heap handles created by `*_new`/`*_from_*` functions and
//! released with the matching `*_free`. Every fallible function returns a
//! [`CdStatus`]; on failure a description is available from
//! [`crossdiff_last_error_message`] on the same thread. Output pointers are
//! written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use crossdiff::io::{parse_config, ParsedConfig};
use crossdiff::solver::{diagnostics, GridState, Problem, StepDiagnostics};
use crossdiff::{
    check_psd_iff, check_symmetry, check_theorem_conditions, entropy_gradient, entropy_gradient_inverse, epsilon_max,
    from_skt, spectral_oracle_scan, CoeffSet, EntropyVariable, Error, Mat2, SktParams, StatePoint, CHECK_TOL,
};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Precondition = 4,
    Admissibility = 5,
    Config = 6,
    InitialData = 7,
    NewtonFailure = 8,
    TauUnderflow = 9,
    Io = 10,
    Panic = 11,
}

impl From<&Error> for CdStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidState(_) => CdStatus::InvalidArgument,
            Error::Domain { .. } => CdStatus::Domain,
            Error::Precondition { .. } => CdStatus::Precondition,
            Error::NewtonFailure { .. } => CdStatus::NewtonFailure,
            Error::TauUnderflow { .. } => CdStatus::TauUnderflow,
            Error::InitialData(_) => CdStatus::InitialData,
            Error::Config { .. } => CdStatus::Config,
            Error::Admissibility { .. } => CdStatus::Admissibility,
            Error::Io(_) => CdStatus::Io,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Run `f`, translating errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), (CdStatus, String)>>(f: F) -> CdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CdStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            CdStatus::Panic
        }
    }
}

fn lib<T>(r: crossdiff::Result<T>) -> Result<T, (CdStatus, String)> {
    r.map_err(|e| (CdStatus::from(&e), e.to_string()))
}

fn non_null<'a, T>(p: *const T, name: &str) -> Result<&'a T, (CdStatus, String)> {
    // SAFETY: callers pass either null or a pointer obtained from this library
    // (or a valid pointer to `T`) that outlives the call.
    unsafe { p.as_ref() }.ok_or((CdStatus::NullPointer, format!("`{name}` is null")))
}

fn out<T>(p: *mut T, name: &str) -> Result<*mut T, (CdStatus, String)> {
    if p.is_null() {
        Err((CdStatus::NullPointer, format!("`{name}` is null")))
    } else {
        Ok(p)
    }
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn crossdiff_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

// ------------------------------------------------------------------ entropy

/// `w = Dh(u)` for a point strictly inside the triangle.
#[no_mangle]
pub extern "C" fn crossdiff_entropy_gradient(u1: f64, u2: f64, w1: *mut f64, w2: *mut f64) -> CdStatus {
    guard(|| {
        let (w1, w2) = (out(w1, "w1")?, out(w2, "w2")?);
        let w = lib(entropy_gradient(&StatePoint::new(u1, u2)))?;
        // SAFETY: checked non-null above.
        unsafe {
            *w1 = w.w1;
            *w2 = w.w2;
        }
        Ok(())
    })
}

/// `u = (Dh)⁻¹(w)`; the result lies in the closed triangle for every finite `w`.
#[no_mangle]
pub extern "C" fn crossdiff_entropy_gradient_inverse(w1: f64, w2: f64, u1: *mut f64, u2: *mut f64) -> CdStatus {
    guard(|| {
        let (u1, u2) = (out(u1, "u1")?, out(u2, "u2")?);
        let u = lib(entropy_gradient_inverse(&EntropyVariable::new(w1, w2)))?;
        // SAFETY: checked non-null above.
        unsafe {
            *u1 = u.u1;
            *u2 = u.u2;
        }
        Ok(())
    })
}

// --------------------------------------------------------------- coefficients

/// Opaque coefficient set `A(u) = α + β u1 + γ u2`.
pub struct CdCoeffSet {
    inner: CoeffSet,
}

fn boxed(c: CoeffSet, dst: *mut *mut CdCoeffSet) -> Result<(), (CdStatus, String)> {
    let dst = out(dst, "out")?;
    // SAFETY: checked non-null above.
    unsafe { *dst = Box::into_raw(Box::new(CdCoeffSet { inner: c })) };
    Ok(())
}

fn mat(p: *const f64, name: &str) -> Result<Mat2, (CdStatus, String)> {
    non_null(p, name)?;
    // SAFETY: non-null; the caller provides four row-major entries.
    let s = unsafe { std::slice::from_raw_parts(p, 4) };
    Ok(Mat2::new(s[0], s[1], s[2], s[3]))
}

/// Build from three row-major 2x2 matrices of four doubles each.
#[no_mangle]
pub extern "C" fn crossdiff_coeffs_new(
    alpha: *const f64,
    beta: *const f64,
    gamma: *const f64,
    out_set: *mut *mut CdCoeffSet,
) -> CdStatus {
    guard(|| {
        let c = lib(CoeffSet::new(mat(alpha, "alpha")?, mat(beta, "beta")?, mat(gamma, "gamma")?))?;
        boxed(c, out_set)
    })
}

/// Symmetric set completed from its five free parameters.
#[no_mangle]
pub extern "C" fn crossdiff_coeffs_from_free(
    a11: f64,
    a22: f64,
    b11: f64,
    b12: f64,
    g22: f64,
    out_set: *mut *mut CdCoeffSet,
) -> CdStatus {
    guard(|| {
        let c = CoeffSet::from_free(a11, a22, b11, b12, g22);
        if !c.is_finite() {
            return Err((CdStatus::InvalidArgument, "parameters must be finite".into()));
        }
        boxed(c, out_set)
    })
}

/// Set derived from the SKT diffusion constants `a10, a20, a11, a12, a21, a22`.
#[no_mangle]
pub extern "C" fn crossdiff_coeffs_from_skt(a: *const f64, out_set: *mut *mut CdCoeffSet) -> CdStatus {
    guard(|| {
        non_null(a, "a")?;
        // SAFETY: non-null; the caller provides six doubles.
        let a = unsafe { std::slice::from_raw_parts(a, 6) };
        let s = SktParams::diffusion(a[0], a[1], a[2], a[3], a[4], a[5]);
        lib(s.validate())?;
        boxed(from_skt(&s), out_set)
    })
}

/// Release a coefficient set. Null is ignored.
#[no_mangle]
pub extern "C" fn crossdiff_coeffs_free(set: *mut CdCoeffSet) {
    if !set.is_null() {
        // SAFETY: the pointer came from `Box::into_raw` in this library.
        drop(unsafe { Box::from_raw(set) });
    }
}

/// Which closed-form check to run.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdCheck {
    Symmetry = 0,
    PsdIff = 1,
    TheoremStrict = 2,
}

/// Run a closed-form check; `passed` receives the verdict and `min_margin`
/// (optional, may be null) the smallest reported margin.
#[no_mangle]
pub extern "C" fn crossdiff_check(
    set: *const CdCoeffSet,
    check: CdCheck,
    passed: *mut bool,
    min_margin: *mut f64,
) -> CdStatus {
    guard(|| {
        let c = &non_null(set, "set")?.inner;
        let passed = out(passed, "passed")?;
        let report = match check {
            CdCheck::Symmetry => check_symmetry(c, CHECK_TOL),
            CdCheck::PsdIff => lib(check_psd_iff(c, CHECK_TOL))?,
            CdCheck::TheoremStrict => lib(check_theorem_conditions(c, CHECK_TOL))?,
        };
        let m = report.margins.iter().map(|m| m.value).fold(f64::INFINITY, f64::min);
        // SAFETY: `passed` checked non-null; `min_margin` is optional.
        unsafe {
            *passed = report.passed;
            if !min_margin.is_null() {
                *min_margin = m;
            }
        }
        Ok(())
    })
}

/// Largest weighted coercivity constant; fails with `PRECONDITION` when the
/// set is not positive semidefinite.
#[no_mangle]
pub extern "C" fn crossdiff_epsilon_max(set: *const CdCoeffSet, eps: *mut f64) -> CdStatus {
    guard(|| {
        let c = &non_null(set, "set")?.inner;
        let eps = out(eps, "eps")?;
        let v = lib(epsilon_max(c))?;
        // SAFETY: checked non-null above.
        unsafe { *eps = v };
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CdSpectralScan {
    pub unweighted_min: f64,
    pub unweighted_argmin_u1: f64,
    pub unweighted_argmin_u2: f64,
    pub weighted_min: f64,
    pub weighted_argmin_u1: f64,
    pub weighted_argmin_u2: f64,
    pub samples: usize,
}

/// Brute-force spectral scan at grid resolution `n` (at least 8).
#[no_mangle]
pub extern "C" fn crossdiff_oracle_scan(set: *const CdCoeffSet, n: usize, result: *mut CdSpectralScan) -> CdStatus {
    guard(|| {
        let c = &non_null(set, "set")?.inner;
        let result = out(result, "result")?;
        let s = spectral_oracle_scan(c, n);
        // SAFETY: checked non-null above.
        unsafe {
            *result = CdSpectralScan {
                unweighted_min: s.unweighted_min,
                unweighted_argmin_u1: s.unweighted_argmin.u1,
                unweighted_argmin_u2: s.unweighted_argmin.u2,
                weighted_min: s.weighted_min,
                weighted_argmin_u1: s.weighted_argmin.u1,
                weighted_argmin_u2: s.weighted_argmin.u2,
                samples: s.samples,
            }
        };
        Ok(())
    })
}

// ----------------------------------------------------------------- simulation

/// Opaque simulation: a validated configuration and its current state.
pub struct CdSimulation {
    config: ParsedConfig,
    problem: Problem,
    state: GridState,
    steps: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CdDiagnostics {
    pub step: usize,
    pub t: f64,
    pub entropy_raw: f64,
    pub entropy_normalized: f64,
    pub mass1: f64,
    pub mass2: f64,
    pub min_u3: f64,
    pub dissipation: f64,
    pub newton_iters: usize,
    pub tau: f64,
}

impl From<StepDiagnostics> for CdDiagnostics {
    fn from(d: StepDiagnostics) -> Self {
        Self {
            step: d.step,
            t: d.t,
            entropy_raw: d.entropy_raw,
            entropy_normalized: d.entropy_normalized,
            mass1: d.mass1,
            mass2: d.mass2,
            min_u3: d.min_u3,
            dissipation: d.dissipation,
            newton_iters: d.newton_iters,
            tau: d.tau,
        }
    }
}

fn sim_mut<'a>(p: *mut CdSimulation) -> Result<&'a mut CdSimulation, (CdStatus, String)> {
    // SAFETY: null or a live handle from `crossdiff_sim_from_config`, not aliased during the call.
    unsafe { p.as_mut() }.ok_or((CdStatus::NullPointer, "`sim` is null".into()))
}

fn write_diag(dst: *mut CdDiagnostics, d: StepDiagnostics) {
    if !dst.is_null() {
        // SAFETY: non-null, caller-provided storage.
        unsafe { *dst = d.into() };
    }
}

/// Create a simulation from a TOML configuration document (UTF-8, NUL-terminated).
#[no_mangle]
pub extern "C" fn crossdiff_sim_from_config(document: *const c_char, out_sim: *mut *mut CdSimulation) -> CdStatus {
    guard(|| {
        non_null(document, "document")?;
        let dst = out(out_sim, "out_sim")?;
        // SAFETY: non-null and NUL-terminated per the contract.
        let text = unsafe { CStr::from_ptr(document) }
            .to_str()
            .map_err(|_| (CdStatus::InvalidArgument, "document is not UTF-8".to_string()))?;
        let config = lib(parse_config(text))?;
        let problem = lib(Problem::new(config.grid, config.coeffs, config.reaction.clone()))?;
        let state = lib(GridState::from_densities(&lib(config.initial_densities())?, 0.0))?;
        let sim = CdSimulation { config, problem, state, steps: 0 };
        // SAFETY: checked non-null above.
        unsafe { *dst = Box::into_raw(Box::new(sim)) };
        Ok(())
    })
}

/// Release a simulation. Null is ignored.
#[no_mangle]
pub extern "C" fn crossdiff_sim_free(sim: *mut CdSimulation) {
    if !sim.is_null() {
        // SAFETY: the pointer came from `Box::into_raw` in this library.
        drop(unsafe { Box::from_raw(sim) });
    }
}

/// Advance by one implicit step of size `tau`; a non-positive or NaN `tau`
/// uses the configured step. On failure the state is unchanged. `diag` may be null.
#[no_mangle]
pub extern "C" fn crossdiff_sim_step(sim: *mut CdSimulation, tau: f64, diag: *mut CdDiagnostics) -> CdStatus {
    guard(|| {
        let sim = sim_mut(sim)?;
        let tau = if tau > 0.0 { tau } else { sim.config.config.time.tau };
        let (next, mut d) = lib(sim.problem.step_implicit(&sim.state, tau))?;
        sim.steps += 1;
        d.step = sim.steps;
        sim.state = next;
        write_diag(diag, d);
        Ok(())
    })
}

/// Diagnostics of the current state without stepping.
#[no_mangle]
pub extern "C" fn crossdiff_sim_diagnostics(sim: *mut CdSimulation, diag: *mut CdDiagnostics) -> CdStatus {
    guard(|| {
        let sim = sim_mut(sim)?;
        let diag = out(diag, "diag")?;
        let mut d = diagnostics(&sim.state, &sim.config.grid, &sim.config.coeffs);
        d.step = sim.steps;
        write_diag(diag, d);
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn crossdiff_sim_n_cells(sim: *const CdSimulation) -> usize {
    // SAFETY: null or a live handle.
    unsafe { sim.as_ref() }.map_or(0, |s| s.state.n_cells())
}

#[no_mangle]
pub extern "C" fn crossdiff_sim_time(sim: *const CdSimulation) -> f64 {
    // SAFETY: null or a live handle.
    unsafe { sim.as_ref() }.map_or(f64::NAN, |s| s.state.t)
}

/// Copy the current densities into `u1` and `u2`, each of length `len`,
/// which must equal the number of cells.
#[no_mangle]
pub extern "C" fn crossdiff_sim_densities(sim: *const CdSimulation, u1: *mut f64, u2: *mut f64, len: usize) -> CdStatus {
    guard(|| {
        let sim = non_null(sim, "sim")?;
        let (u1, u2) = (out(u1, "u1")?, out(u2, "u2")?);
        if len != sim.state.n_cells() {
            return Err((CdStatus::InvalidArgument, format!("len {len} != {} cells", sim.state.n_cells())));
        }
        // SAFETY: both buffers are non-null with `len` elements per the contract.
        let (a, b) = unsafe { (std::slice::from_raw_parts_mut(u1, len), std::slice::from_raw_parts_mut(u2, len)) };
        for (j, p) in sim.state.densities().iter().enumerate() {
            a[j] = p.u1;
            b[j] = p.u2;
        }
        Ok(())
    })
}
