//! C ABI over `normbranch`.
//!
//! Every fallible call returns an [`NbStatus`]. On failure the message is kept
//! per thread and can be read with [`nb_last_error`]. Handles are opaque and
//! must be released with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use normbranch::branch::{sweep_branch, BranchGrid, MassCurve};
use normbranch::diagnostics::BranchPoint;
use normbranch::ground_states::kwong_ground_state;
use normbranch::nonlinearity::NonlinearitySpec;
use normbranch::normalized::{solve_normalized, CaseLabel, CaseReport, PredictionStatus};
use normbranch::profile::RadialProfile;
use normbranch::shooting::{shoot_ground, ShootingControls};
use normbranch::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Domain = 3,
    Numerical = 4,
    SweepDegenerate = 5,
    OutOfRange = 6,
    Panic = 7,
}

/// Scalar summary of one solution on the branch.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NbBranchPoint {
    pub lambda: f64,
    pub mass: f64,
    pub kinetic: f64,
    pub sup: f64,
    pub potential: f64,
    pub action: f64,
    pub pohozaev_residual: f64,
    pub nehari_residual: f64,
    pub mp_gap: f64,
}

impl From<&BranchPoint> for NbBranchPoint {
    fn from(p: &BranchPoint) -> Self {
        Self {
            lambda: p.lambda,
            mass: p.mass,
            kinetic: p.kinetic,
            sup: p.sup,
            potential: p.potential,
            action: p.action,
            pohozaev_residual: p.pohozaev_residual,
            nehari_residual: p.nehari_residual,
            mp_gap: p.mp_gap,
        }
    }
}

/// Parsed nonlinearity `g(s) = Σ μ_i s^{p_i}`.
pub struct NbSpec(NonlinearitySpec);

/// Positive radial solution at one frequency.
pub struct NbProfile {
    profile: RadialProfile,
    point: BranchPoint,
}

/// Mass curve over a frequency grid.
pub struct NbCurve(MassCurve);

/// Solutions of the fixed-mass problem.
pub struct NbNormalized(CaseReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    let c = CString::new(msg).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn fail(status: NbStatus, msg: impl Into<String>) -> NbStatus {
    set_error(msg);
    status
}

fn from_error(e: &Error) -> NbStatus {
    let status = match e {
        Error::SweepDegenerate { .. } => NbStatus::SweepDegenerate,
        e if e.is_domain() => NbStatus::Domain,
        _ => NbStatus::Numerical,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> NbStatus) -> NbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(NbStatus::Panic, "internal panic"),
    }
}

fn dimension(n: u32) -> Result<u32, NbStatus> {
    if n == 0 {
        Err(fail(NbStatus::Domain, "dimension must be at least 1"))
    } else {
        Ok(n)
    }
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Message of the last failed call on this thread, or NULL.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nb_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn nb_status_name(status: NbStatus) -> *const c_char {
    let s: &'static CStr = match status {
        NbStatus::Ok => c"ok",
        NbStatus::NullPointer => c"null-pointer",
        NbStatus::InvalidUtf8 => c"invalid-utf8",
        NbStatus::Domain => c"domain",
        NbStatus::Numerical => c"numerical",
        NbStatus::SweepDegenerate => c"sweep-degenerate",
        NbStatus::OutOfRange => c"out-of-range",
        NbStatus::Panic => c"panic",
    };
    s.as_ptr()
}

/// Parses a nonlinearity such as `"1*s^3 + 0.5*s^5"`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nb_spec_parse(text: *const c_char, out: *mut *mut NbSpec) -> NbStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return fail(NbStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        let Ok(s) = CStr::from_ptr(text).to_str() else {
            return fail(NbStatus::InvalidUtf8, "nonlinearity is not valid UTF-8");
        };
        match s.parse::<NonlinearitySpec>() {
            Ok(spec) => {
                put(out, NbSpec(spec));
                NbStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// # Safety
/// `spec` must come from [`nb_spec_parse`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn nb_spec_free(spec: *mut NbSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Evaluates `g(s)` for `s >= 0`.
///
/// # Safety
/// `spec` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nb_spec_eval_g(spec: *const NbSpec, s: f64, out: *mut f64) -> NbStatus {
    guard(|| {
        if spec.is_null() || out.is_null() {
            return fail(NbStatus::NullPointer, "null argument");
        }
        match (*spec).0.eval_g(s) {
            Ok(v) => {
                *out = v;
                NbStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Solves for the positive radial solution at frequency `lambda`.
///
/// # Safety
/// `spec` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nb_shoot(spec: *const NbSpec, n: u32, lambda: f64, out: *mut *mut NbProfile) -> NbStatus {
    guard(|| {
        if spec.is_null() || out.is_null() {
            return fail(NbStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        let n = match dimension(n) {
            Ok(n) => n,
            Err(s) => return s,
        };
        let controls = ShootingControls::default();
        let result = shoot_ground(&(*spec).0, n, lambda, &controls, None)
            .and_then(|profile| BranchPoint::from_profile(&profile).map(|point| (profile, point)));
        match result {
            Ok((profile, point)) => {
                put(out, NbProfile { profile, point });
                NbStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// # Safety
/// `profile` must come from [`nb_shoot`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn nb_profile_free(profile: *mut NbProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// # Safety
/// `profile` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nb_profile_point(profile: *const NbProfile, out: *mut NbBranchPoint) -> NbStatus {
    if profile.is_null() || out.is_null() {
        return fail(NbStatus::NullPointer, "null argument");
    }
    *out = NbBranchPoint::from(&(*profile).point);
    NbStatus::Ok
}

/// `u(r)` and `u'(r)`, using the exponential tail beyond the last node.
///
/// # Safety
/// `profile`, `u` and `du` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nb_profile_eval(profile: *const NbProfile, r: f64, u: *mut f64, du: *mut f64) -> NbStatus {
    if profile.is_null() || u.is_null() || du.is_null() {
        return fail(NbStatus::NullPointer, "null argument");
    }
    if r.is_nan() || r < 0.0 {
        return fail(NbStatus::Domain, format!("radius must be non-negative (got {r})"));
    }
    let (a, b) = (*profile).profile.eval(r);
    *u = a;
    *du = b;
    NbStatus::Ok
}

/// Sweeps the branch over `[lambda_min, lambda_max]`.
///
/// A degenerate sweep still hands back the partial curve and returns
/// [`NbStatus::SweepDegenerate`].
///
/// # Safety
/// `spec` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nb_branch_sweep(
    spec: *const NbSpec,
    n: u32,
    lambda_min: f64,
    lambda_max: f64,
    points_per_decade: u32,
    out: *mut *mut NbCurve,
) -> NbStatus {
    guard(|| {
        if spec.is_null() || out.is_null() {
            return fail(NbStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        let n = match dimension(n) {
            Ok(n) => n,
            Err(s) => return s,
        };
        let grid = match BranchGrid::new(lambda_min, lambda_max, points_per_decade) {
            Ok(g) => g,
            Err(e) => return from_error(&e),
        };
        match sweep_branch(&(*spec).0, n, &grid, &ShootingControls::default()) {
            Ok(curve) => {
                put(out, NbCurve(curve));
                NbStatus::Ok
            }
            Err(Error::SweepDegenerate { failed, total, partial }) => {
                put(out, NbCurve(*partial));
                fail(
                    NbStatus::SweepDegenerate,
                    format!("sweep degenerate: {failed} of {total} grid points failed"),
                )
            }
            Err(e) => from_error(&e),
        }
    })
}

/// # Safety
/// `curve` must come from [`nb_branch_sweep`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn nb_curve_free(curve: *mut NbCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Number of solved grid points.
///
/// # Safety
/// `curve` must be a valid pointer or NULL.
#[no_mangle]
pub unsafe extern "C" fn nb_curve_len(curve: *const NbCurve) -> usize {
    if curve.is_null() {
        0
    } else {
        (*curve).0.points.len()
    }
}

/// Number of grid points that failed to solve.
///
/// # Safety
/// `curve` must be a valid pointer or NULL.
#[no_mangle]
pub unsafe extern "C" fn nb_curve_failures(curve: *const NbCurve) -> usize {
    if curve.is_null() {
        0
    } else {
        (*curve).0.failures.len()
    }
}

/// # Safety
/// `curve` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nb_curve_point(curve: *const NbCurve, index: usize, out: *mut NbBranchPoint) -> NbStatus {
    if curve.is_null() || out.is_null() {
        return fail(NbStatus::NullPointer, "null argument");
    }
    let points = &(*curve).0.points;
    match points.get(index) {
        Some(p) => {
            *out = p.into();
            NbStatus::Ok
        }
        None => fail(NbStatus::OutOfRange, format!("index {index} out of range")),
    }
}

/// Fitted small and large frequency exponents; NaN when unavailable.
///
/// # Safety
/// `curve`, `e0` and `einf` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nb_curve_exponents(curve: *const NbCurve, e0: *mut f64, einf: *mut f64) -> NbStatus {
    if curve.is_null() || e0.is_null() || einf.is_null() {
        return fail(NbStatus::NullPointer, "null argument");
    }
    *e0 = (*curve).0.e0.unwrap_or(f64::NAN);
    *einf = (*curve).0.einf.unwrap_or(f64::NAN);
    NbStatus::Ok
}

/// Mass and central value of the pure-power ground state at `λ = 1`.
///
/// # Safety
/// `mass` and `u0` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nb_ground_state(n: u32, p: f64, mu: f64, mass: *mut f64, u0: *mut f64) -> NbStatus {
    guard(|| {
        if mass.is_null() || u0.is_null() {
            return fail(NbStatus::NullPointer, "null argument");
        }
        let n = match dimension(n) {
            Ok(n) => n,
            Err(s) => return s,
        };
        match kwong_ground_state(n, p, mu) {
            Ok(gs) => {
                *mass = gs.mass;
                *u0 = gs.central_value;
                NbStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Finds the solutions with prescribed mass `a`.
///
/// # Safety
/// `spec` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nb_normalize(
    spec: *const NbSpec,
    n: u32,
    a: f64,
    lambda_min: f64,
    lambda_max: f64,
    points_per_decade: u32,
    out: *mut *mut NbNormalized,
) -> NbStatus {
    guard(|| {
        if spec.is_null() || out.is_null() {
            return fail(NbStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        let n = match dimension(n) {
            Ok(n) => n,
            Err(s) => return s,
        };
        let grid = match BranchGrid::new(lambda_min, lambda_max, points_per_decade) {
            Ok(g) => g,
            Err(e) => return from_error(&e),
        };
        match solve_normalized(&(*spec).0, n, a, &grid, &ShootingControls::default()) {
            Ok(report) => {
                put(out, NbNormalized(report));
                NbStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// # Safety
/// `report` must come from [`nb_normalize`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn nb_normalized_free(report: *mut NbNormalized) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `report` must be a valid pointer or NULL.
#[no_mangle]
pub unsafe extern "C" fn nb_normalized_root_count(report: *const NbNormalized) -> usize {
    if report.is_null() {
        0
    } else {
        (*report).0.roots.len()
    }
}

/// # Safety
/// `report` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nb_normalized_root(
    report: *const NbNormalized,
    index: usize,
    out: *mut NbBranchPoint,
) -> NbStatus {
    if report.is_null() || out.is_null() {
        return fail(NbStatus::NullPointer, "null argument");
    }
    let roots = &(*report).0.roots;
    match roots.get(index) {
        Some(r) => {
            *out = (&r.point).into();
            NbStatus::Ok
        }
        None => fail(NbStatus::OutOfRange, format!("index {index} out of range")),
    }
}

/// Case label such as `"iii-1"`, static storage.
///
/// # Safety
/// `report` must be a valid pointer or NULL.
#[no_mangle]
pub unsafe extern "C" fn nb_normalized_case(report: *const NbNormalized) -> *const c_char {
    if report.is_null() {
        return ptr::null();
    }
    let label: &'static CStr = match (*report).0.case {
        CaseLabel::I => c"i",
        CaseLabel::II => c"ii",
        CaseLabel::III1 => c"iii-1",
        CaseLabel::III2 => c"iii-2",
        CaseLabel::IV1 => c"iv-1",
        CaseLabel::IV2 => c"iv-2",
        CaseLabel::V1 => c"v-1",
        CaseLabel::V2 => c"v-2",
        CaseLabel::VI => c"vi",
    };
    label.as_ptr()
}

/// 1 when the observed root count agrees with the predicted one, else 0.
///
/// # Safety
/// `report` must be a valid pointer or NULL.
#[no_mangle]
pub unsafe extern "C" fn nb_normalized_prediction_met(report: *const NbNormalized) -> i32 {
    if report.is_null() {
        return 0;
    }
    i32::from((*report).0.status == PredictionStatus::Met)
}
