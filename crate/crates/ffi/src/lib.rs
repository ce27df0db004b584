//! C ABI over `curvlab`.
//!
//! Every fallible entry point returns a [`CurvStatus`] and writes its result
//! through an out-pointer. On failure the message is retrievable with
//! [`curv_last_error_message`] on the same thread. Handles are opaque and
//! must be released with their matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use curvlab::atlas::{self, StabilityQuery, VerdictKind};
use curvlab::chart::{self, MetricField, ModelKind, QuadratureGrid};
use curvlab::functionals::{self, Coefficients};
use curvlab::spectral;
use curvlab::tensor;
use curvlab::variation::{self, HessianCase, ModeKind};
use curvlab::CurvError;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnsupportedDimension = 3,
    NotPositiveDefinite = 4,
    Precondition = 5,
    Domain = 6,
    Tolerance = 7,
    Numerical = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// Values accepted by the `kind` argument of [`curv_model_new`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvModelKind {
    Torus = 0,
    Sphere = 1,
    PoincareBall = 2,
    EulerS3 = 3,
}

/// Values accepted by the `mode` argument of [`curv_classify`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvMode {
    Tt = 0,
    Conformal = 1,
}

/// Values written by [`curv_classify`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvVerdict {
    LocalMin = 0,
    LocalMax = 1,
    Boundary = 2,
    Undetermined = 3,
}

/// Pointwise curvature norms.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CurvCurvature {
    pub scalar: f64,
    pub norm_rm2: f64,
    pub norm_ric2: f64,
    pub norm_weyl2: f64,
}

/// Integrated quadratic curvature quantities.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CurvFunctional {
    pub weyl: f64,
    pub ricci: f64,
    pub scalar: f64,
    pub rm: f64,
    pub value: f64,
    pub volume: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CurvVariation {
    pub d1_numeric: f64,
    pub d1_analytic: f64,
    pub d2_numeric: f64,
    pub d2_predicted: f64,
    pub rel_err_d1: f64,
    pub rel_err_d2: f64,
    pub c_lagrange: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CurvRayleigh {
    pub energy: f64,
    pub norm2: f64,
    pub quotient: f64,
    pub tt_defect_div: f64,
    pub tt_defect_tr: f64,
}

/// Opaque metric on a coordinate chart.
pub struct CurvMetric {
    inner: MetricField,
}

/// Opaque tensor-product quadrature grid.
pub struct CurvGrid {
    inner: QuadratureGrid,
}

/// Opaque space-form base plus an eigen-direction for second-variation checks.
pub struct CurvCase {
    inner: HessianCase,
}

// ---------------------------------------------------------------------------
// Error plumbing

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure {
    status: CurvStatus,
    message: String,
}

impl Failure {
    fn new(status: CurvStatus, message: impl Into<String>) -> Self {
        Failure {
            status,
            message: message.into(),
        }
    }
}

impl From<CurvError> for Failure {
    fn from(e: CurvError) -> Self {
        let status = match &e {
            CurvError::UnsupportedDimension(_) => CurvStatus::UnsupportedDimension,
            CurvError::NotPositiveDefinite { .. } => CurvStatus::NotPositiveDefinite,
            CurvError::Precondition(_)
            | CurvError::NotClosed(_)
            | CurvError::NotEinstein { .. } => CurvStatus::Precondition,
            CurvError::Domain(_) => CurvStatus::Domain,
            CurvError::Tolerance { .. } => CurvStatus::Tolerance,
            CurvError::NonFinite(_) => CurvStatus::Numerical,
            _ => CurvStatus::InvalidArgument,
        };
        Failure::new(status, e.to_string())
    }
}

type FfiResult<T> = std::result::Result<T, Failure>;

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn guard<F>(f: F) -> CurvStatus
where
    F: FnOnce() -> FfiResult<()>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            CurvStatus::Ok
        }
        Ok(Err(fail)) => {
            set_last_error(&fail.message);
            fail.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            CurvStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure::new(CurvStatus::NullPointer, format!("{what} is null"))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> FfiResult<()> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn coefficients(s: f64, tau: f64) -> FfiResult<Coefficients> {
    Ok(Coefficients::new(s, tau)?)
}

fn model_kind(kind: i32) -> FfiResult<ModelKind> {
    match kind {
        0 => Ok(ModelKind::Torus),
        1 => Ok(ModelKind::Sphere),
        2 => Ok(ModelKind::PoincareBall),
        3 => Ok(ModelKind::EulerS3),
        _ => Err(Failure::new(
            CurvStatus::InvalidArgument,
            format!("unknown model kind {kind}"),
        )),
    }
}

fn mode_kind(mode: i32) -> FfiResult<ModeKind> {
    match mode {
        0 => Ok(ModeKind::Tt),
        1 => Ok(ModeKind::Conformal),
        _ => Err(Failure::new(
            CurvStatus::InvalidArgument,
            format!("unknown mode {mode}"),
        )),
    }
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

// ---------------------------------------------------------------------------
// Library info

/// Message of the last failed call on this thread, or `""` after a success.
/// The pointer stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn curv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Crate version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn curv_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => c"",
        };
    VERSION.as_ptr()
}

// ---------------------------------------------------------------------------
// Metrics and grids

/// Builds a constant-curvature model. `kind` is a [`CurvModelKind`] value and
/// `lambda` must carry the model's curvature sign (0 for the torus).
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn curv_model_new(
    kind: i32,
    n: usize,
    lambda: f64,
    scale: f64,
    out: *mut *mut CurvMetric,
) -> CurvStatus {
    guard(|| {
        let inner = chart::make_model(model_kind(kind)?, n, lambda, scale)?;
        write(out, boxed(CurvMetric { inner }), "out")
    })
}

/// Releases a metric handle. Null is ignored.
///
/// # Safety
/// `metric` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn curv_metric_free(metric: *mut CurvMetric) {
    if !metric.is_null() {
        drop(Box::from_raw(metric));
    }
}

/// Chart dimension, or 0 for a null handle.
///
/// # Safety
/// `metric` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn curv_metric_dim(metric: *const CurvMetric) -> usize {
    metric.as_ref().map_or(0, |m| m.inner.dim())
}

/// Gauss–Legendre (or periodic trapezoid) grid on the metric's chart with
/// `resolution[i]` nodes along axis `i`.
///
/// # Safety
/// `resolution` must point to `len` readable values and `out` to one writable handle.
#[no_mangle]
pub unsafe extern "C" fn curv_grid_new(
    metric: *const CurvMetric,
    resolution: *const usize,
    len: usize,
    out: *mut *mut CurvGrid,
) -> CurvStatus {
    guard(|| {
        let m = get(metric, "metric")?;
        let res = slice(resolution, len, "resolution")?;
        let inner = chart::build_grid(m.inner.domain(), res)?;
        write(out, boxed(CurvGrid { inner }), "out")
    })
}

/// Releases a grid handle. Null is ignored.
///
/// # Safety
/// `grid` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn curv_grid_free(grid: *mut CurvGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Number of quadrature nodes, or 0 for a null handle.
///
/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn curv_grid_len(grid: *const CurvGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.inner.len())
}

/// Riemannian volume by quadrature.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn curv_volume(
    metric: *const CurvMetric,
    grid: *const CurvGrid,
    out: *mut f64,
) -> CurvStatus {
    guard(|| {
        let v = chart::volume(&get(metric, "metric")?.inner, &get(grid, "grid")?.inner)?;
        write(out, v, "out")
    })
}

/// New handle for the constant rescaling of `metric` to unit volume; the
/// factor `c` with `g̃ = c·g` goes to `out_scale` when it is non-null.
///
/// # Safety
/// Handles must be live, `out` writable and `out_scale` null or writable.
#[no_mangle]
pub unsafe extern "C" fn curv_metric_unit_volume(
    metric: *const CurvMetric,
    grid: *const CurvGrid,
    out: *mut *mut CurvMetric,
    out_scale: *mut f64,
) -> CurvStatus {
    guard(|| {
        let (inner, c) =
            chart::normalize_volume(&get(metric, "metric")?.inner, &get(grid, "grid")?.inner)?;
        if !out_scale.is_null() {
            out_scale.write(c);
        }
        write(out, boxed(CurvMetric { inner }), "out")
    })
}

// ---------------------------------------------------------------------------
// Curvature and functionals

/// Curvature norms at the chart point `x[0..len]`.
///
/// # Safety
/// `x` must point to `len` readable values and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn curv_curvature_at(
    metric: *const CurvMetric,
    x: *const f64,
    len: usize,
    out: *mut CurvCurvature,
) -> CurvStatus {
    guard(|| {
        let m = get(metric, "metric")?;
        let x = slice(x, len, "x")?;
        if x.len() != m.inner.dim() {
            return Err(CurvError::DimensionMismatch {
                expected: m.inner.dim(),
                got: x.len(),
            }
            .into());
        }
        let b = tensor::curvature(&m.inner, x)?;
        let c = CurvCurvature {
            scalar: b.scalar,
            norm_rm2: b.norm_rm2,
            norm_ric2: b.norm_ric2,
            norm_weyl2: b.norm_weyl2,
        };
        write(out, c, "out")
    })
}

/// Largest deviation over the grid of `Rm, Ric, R` from the constant-curvature
/// values `λ(g∧g), (n−1)λg, n(n−1)λ`.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn curv_space_form_defect(
    metric: *const CurvMetric,
    grid: *const CurvGrid,
    lambda: f64,
    out: *mut f64,
) -> CurvStatus {
    guard(|| {
        let m = &get(metric, "metric")?.inner;
        let d = get(grid, "grid")?
            .inner
            .sup(|x| Ok(tensor::space_form_defect(&tensor::curvature(m, x)?, lambda).worst()))?;
        write(out, d, "out")
    })
}

/// `F_{s,τ} = ∫|Rm|² + s∫|Ric|² + τ∫R²` and its pieces.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn curv_functional(
    metric: *const CurvMetric,
    grid: *const CurvGrid,
    s: f64,
    tau: f64,
    out: *mut CurvFunctional,
) -> CurvStatus {
    guard(|| {
        let r = functionals::evaluate(
            &get(metric, "metric")?.inner,
            &get(grid, "grid")?.inner,
            coefficients(s, tau)?,
        )?;
        let f = CurvFunctional {
            weyl: r.w,
            ricci: r.rho,
            scalar: r.scal,
            rm: r.rquad,
            value: r.f,
            volume: r.volume,
        };
        write(out, f, "out")
    })
}

/// Sup-norm of the volume-constrained Euler–Lagrange tensor and the averaged
/// Lagrange constant. The metric must have unit volume on the grid.
///
/// # Safety
/// Handles must be live and both out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn curv_el_residual(
    metric: *const CurvMetric,
    grid: *const CurvGrid,
    s: f64,
    tau: f64,
    out_residual: *mut f64,
    out_c: *mut f64,
) -> CurvStatus {
    guard(|| {
        let r = variation::el_residual(
            &get(metric, "metric")?.inner,
            &get(grid, "grid")?.inner,
            coefficients(s, tau)?,
        )?;
        write(out_residual, r.residual, "out_residual")?;
        write(out_c, r.c, "out_c")
    })
}

// ---------------------------------------------------------------------------
// Second variation

/// Invariant TT mode `Σ d_i e^i⊗e^i` (`d[0..3]`, trace-free) on the unit Euler-angle `S³`.
///
/// # Safety
/// `d` must point to 3 readable values and `out` to one writable handle.
#[no_mangle]
pub unsafe extern "C" fn curv_case_s3_invariant(
    d: *const f64,
    out: *mut *mut CurvCase,
) -> CurvStatus {
    guard(|| {
        let d = slice(d, 3, "d")?;
        let inner = HessianCase::s3_invariant([d[0], d[1], d[2]])?;
        write(out, boxed(CurvCase { inner }), "out")
    })
}

/// TT mode `A cos(2π k·x)` on the flat unit `T^n`; `a` is the row-major `n×n` amplitude.
///
/// # Safety
/// `k` must point to `n` values, `a` to `n*n` values and `out` to one writable handle.
#[no_mangle]
pub unsafe extern "C" fn curv_case_torus_tt(
    k: *const i64,
    a: *const f64,
    n: usize,
    out: *mut *mut CurvCase,
) -> CurvStatus {
    guard(|| {
        let k = slice(k, n, "k")?;
        let a = slice(a, n * n, "a")?;
        let inner = HessianCase::torus_tt(k, a)?;
        write(out, boxed(CurvCase { inner }), "out")
    })
}

/// Conformal mode `cos(2π k·x)·g` on the flat unit `T^n`.
///
/// # Safety
/// `k` must point to `n` values and `out` to one writable handle.
#[no_mangle]
pub unsafe extern "C" fn curv_case_torus_conformal(
    k: *const i64,
    n: usize,
    out: *mut *mut CurvCase,
) -> CurvStatus {
    guard(|| {
        let inner = HessianCase::torus_conformal(slice(k, n, "k")?)?;
        write(out, boxed(CurvCase { inner }), "out")
    })
}

/// Releases a case handle. Null is ignored.
///
/// # Safety
/// `case_` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn curv_case_free(case_: *mut CurvCase) {
    if !case_.is_null() {
        drop(Box::from_raw(case_));
    }
}

/// Grid on the chart of the case's base metric.
///
/// # Safety
/// `resolution` must point to `len` readable values and `out` to one writable handle.
#[no_mangle]
pub unsafe extern "C" fn curv_case_grid_new(
    case_: *const CurvCase,
    resolution: *const usize,
    len: usize,
    out: *mut *mut CurvGrid,
) -> CurvStatus {
    guard(|| {
        let c = get(case_, "case")?;
        let inner =
            chart::build_grid(c.inner.base.domain(), slice(resolution, len, "resolution")?)?;
        write(out, boxed(CurvGrid { inner }), "out")
    })
}

/// Numeric first and second variations along the case, next to the closed forms.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn curv_case_verify(
    case_: *const CurvCase,
    grid: *const CurvGrid,
    s: f64,
    tau: f64,
    t_step: f64,
    out: *mut CurvVariation,
) -> CurvStatus {
    guard(|| {
        if !(t_step > 0.0 && t_step.is_finite()) {
            return Err(Failure::new(
                CurvStatus::InvalidArgument,
                format!("t_step must be positive, got {t_step}"),
            ));
        }
        let r = variation::verify_hessian(
            &get(case_, "case")?.inner,
            &get(grid, "grid")?.inner,
            coefficients(s, tau)?,
            t_step,
        )?;
        let v = CurvVariation {
            d1_numeric: r.d1_numeric,
            d1_analytic: r.d1_analytic,
            d2_numeric: r.d2_numeric,
            d2_predicted: r.d2_predicted,
            rel_err_d1: r.rel_err_d1,
            rel_err_d2: r.rel_err_d2,
            c_lagrange: r.c_lagrange,
        };
        write(out, v, "out")
    })
}

/// Rayleigh quotient `∫⟨−Δ_L h, h⟩ / ∫|h|²` of a TT case, with the spherical
/// bound `4nλ` enforced (status `CURV_STATUS_TOLERANCE` when violated).
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn curv_case_rayleigh(
    case_: *const CurvCase,
    grid: *const CurvGrid,
    out: *mut CurvRayleigh,
) -> CurvStatus {
    guard(|| {
        let c = &get(case_, "case")?.inner;
        if c.mode != ModeKind::Tt {
            return Err(CurvError::InvalidMode("Rayleigh quotient needs a TT case".into()).into());
        }
        let r = spectral::rayleigh_lichnerowicz(&c.base, &c.h, &get(grid, "grid")?.inner, "ffi")?;
        let v = CurvRayleigh {
            energy: r.energy,
            norm2: r.norm2,
            quotient: r.quotient,
            tt_defect_div: r.tt_defect_div,
            tt_defect_tr: r.tt_defect_tr,
        };
        write(out, v, "out")
    })
}

/// Closed-form second variation along a TT eigentensor with `−Δ_L h = λ_L h`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn curv_second_variation_tt(
    n: usize,
    lambda: f64,
    lambda_l: f64,
    s: f64,
    tau: f64,
    h_norm2: f64,
    out: *mut f64,
) -> CurvStatus {
    guard(|| {
        let v = variation::second_variation_tt_predicted(
            n,
            lambda,
            lambda_l,
            coefficients(s, tau)?,
            h_norm2,
        )?;
        write(out, v, "out")
    })
}

/// Closed-form second variation along `f·g` with `−Δf = μf`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn curv_second_variation_conformal(
    n: usize,
    lambda: f64,
    mu: f64,
    s: f64,
    tau: f64,
    f_norm2: f64,
    out: *mut f64,
) -> CurvStatus {
    guard(|| {
        let v = variation::second_variation_conformal_predicted(
            n,
            lambda,
            mu,
            coefficients(s, tau)?,
            f_norm2,
        )?;
        write(out, v, "out")
    })
}

// ---------------------------------------------------------------------------
// Stability classifier

/// Conformal polynomial on the unit sphere, `(n−1)(μ−n)(aμ+(n−4)Q)`.
#[no_mangle]
pub extern "C" fn curv_p1(n: usize, s: f64, tau: f64, mu: f64) -> f64 {
    atlas::p1(n, s, tau, mu)
}

/// Conformal polynomial on unit hyperbolic space, `(n−1)(μ+n)(aμ−(n−4)Q)`.
#[no_mangle]
pub extern "C" fn curv_p2(n: usize, s: f64, tau: f64, mu: f64) -> f64 {
    atlas::p2(n, s, tau, mu)
}

/// Classifies `(s, τ)` for the given dimension, curvature sign and mode.
///
/// The verdict goes to `out_verdict` as a [`CurvVerdict`] value. The citation
/// (empty for `Undetermined`) is copied NUL-terminated into `citation`
/// when `citation_len` is large enough, and its length without the NUL goes to
/// `out_citation_len` when non-null. A short buffer yields
/// `CURV_STATUS_BUFFER_TOO_SMALL` with the verdict and length still written.
///
/// # Safety
/// `out_verdict` must be writable; `citation` must be null or point to
/// `citation_len` writable bytes; `out_citation_len` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn curv_classify(
    n: usize,
    lambda: i32,
    mode: i32,
    s: f64,
    tau: f64,
    out_verdict: *mut i32,
    citation: *mut c_char,
    citation_len: usize,
    out_citation_len: *mut usize,
) -> CurvStatus {
    guard(|| {
        let q = StabilityQuery::new(n, lambda, mode_kind(mode)?, s, tau)?;
        let v = atlas::classify(&q);
        let code = match v.value {
            VerdictKind::LocalMin => CurvVerdict::LocalMin,
            VerdictKind::LocalMax => CurvVerdict::LocalMax,
            VerdictKind::Boundary => CurvVerdict::Boundary,
            VerdictKind::Undetermined => CurvVerdict::Undetermined,
        };
        write(out_verdict, code as i32, "out_verdict")?;
        let text = v.citation.unwrap_or_default();
        let bytes = text.as_bytes();
        if !out_citation_len.is_null() {
            out_citation_len.write(bytes.len());
        }
        if citation.is_null() {
            return Ok(());
        }
        if citation_len < bytes.len() + 1 {
            if citation_len > 0 {
                citation.write(0);
            }
            return Err(Failure::new(
                CurvStatus::BufferTooSmall,
                format!("citation needs {} bytes", bytes.len() + 1),
            ));
        }
        ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), citation, bytes.len());
        citation.add(bytes.len()).write(0);
        Ok(())
    })
}
