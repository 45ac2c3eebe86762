//! C ABI over `theta_kummer`.
//!
//! Every entry point returns a [`TkStatus`]; results go through out-pointers.
//! On failure the message is kept per thread and can be fetched with
//! [`tk_last_error_message`]. Points are arrays of `g` [`TkComplex`], where
//! `g` is the genus of the period matrix they are used with. Panics are
//! caught at the boundary and reported as `TK_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nalgebra::DMatrix;

use theta_kummer::divisor::{divisor_identity_residual, DivisorPoint};
use theta_kummer::kummer::{
    bilinear_residual, gamma00_fit, gamma00_residual, kummer_map, semidegenerate_residual, trisecant_residual, Gamma00Instance,
};
use theta_kummer::numeric::{CPoint, C64};
use theta_kummer::scenarios::{genus2_pipeline, sample_siegel, scan_min_residual};
use theta_kummer::theta::{theta_char_eval, theta_eval, DerivSpec, PeriodMatrix, ThetaCharacteristic};
use theta_kummer::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TkComplex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for TkComplex {
    fn from(z: C64) -> Self {
        TkComplex { re: z.re, im: z.im }
    }
}

impl From<TkComplex> for C64 {
    fn from(z: TkComplex) -> Self {
        C64::new(z.re, z.im)
    }
}

/// Result codes. The library error kinds keep their names.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TkStatus {
    Ok = 0,
    NullPointer = 1,
    DimensionMismatch = 2,
    NotPositiveDefinite = 3,
    DegenerateSystem = 4,
    NoConvergence = 5,
    DerivativeVanished = 6,
    RadiusOverflow = 7,
    SingularPoint = 8,
    PoleAtArgument = 9,
    IndecomposabilityCheckFailed = 10,
    NonFinite = 11,
    InvalidInput = 12,
    Panic = 13,
}

impl From<&Error> for TkStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::DimensionMismatch { .. } => TkStatus::DimensionMismatch,
            Error::NotPositiveDefinite { .. } => TkStatus::NotPositiveDefinite,
            Error::DegenerateSystem(_) => TkStatus::DegenerateSystem,
            Error::NoConvergence { .. } => TkStatus::NoConvergence,
            Error::DerivativeVanished(_) => TkStatus::DerivativeVanished,
            Error::RadiusOverflow { .. } => TkStatus::RadiusOverflow,
            Error::SingularPoint { .. } => TkStatus::SingularPoint,
            Error::PoleAtArgument(_) => TkStatus::PoleAtArgument,
            Error::IndecomposabilityCheckFailed { .. } => TkStatus::IndecomposabilityCheckFailed,
            Error::NonFinite(_) => TkStatus::NonFinite,
            Error::InvalidInput(_) => TkStatus::InvalidInput,
        }
    }
}

/// Opaque period matrix handle.
pub struct TkPeriodMatrix {
    inner: PeriodMatrix,
}

/// A theta value with its truncation bound and term-magnitude scale.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TkThetaValue {
    pub value: TkComplex,
    pub tail_bound: f64,
    pub scale: f64,
}

/// Least-squares fit of `K(P) ≈ c K(0) + b ∂_U∂_V K(0)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TkFit {
    pub c: TkComplex,
    pub b: TkComplex,
    pub rel_residual: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<String>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<(), Failure>;

/// Runs `f`, records any failure message, and maps it to a status.
fn guard(f: impl FnOnce() -> Outcome) -> TkStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TkStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            TkStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(format!("{}: {e}", e.name()));
            TkStatus::from(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            TkStatus::Panic
        }
    }
}

unsafe fn handle<'a>(pm: *const TkPeriodMatrix) -> Result<&'a PeriodMatrix, Failure> {
    pm.as_ref().map(|h| &h.inner).ok_or(Failure::Null("period matrix"))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn point(p: *const TkComplex, g: usize, what: &'static str) -> Result<CPoint, Failure> {
    Ok(CPoint::new(slice(p, g, what)?.iter().map(|&z| z.into()).collect()))
}

fn json_string(text: serde_json::Result<String>) -> Result<CString, Failure> {
    let text = text.map_err(|e| Error::InvalidInput(format!("serialization failed: {e}")))?;
    CString::new(text).map_err(|_| Failure::Lib(Error::InvalidInput("JSON contains a NUL byte".into())))
}

/// Builds a period matrix from `g * g` row-major entries.
///
/// # Safety
/// `entries` must point to `g * g` values and `out_pm` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tk_period_matrix_new(g: usize, entries: *const TkComplex, out_pm: *mut *mut TkPeriodMatrix) -> TkStatus {
    guard(|| {
        let out_pm = out(out_pm, "out_pm")?;
        let n = g.checked_mul(g).ok_or(Error::InvalidInput("genus too large".into()))?;
        if g == 0 {
            return Err(Error::InvalidInput("genus must be positive".into()).into());
        }
        let vals: Vec<C64> = slice(entries, n, "entries")?.iter().map(|&z| z.into()).collect();
        let pm = PeriodMatrix::new(DMatrix::from_row_slice(g, g, &vals))?;
        *out_pm = Box::into_raw(Box::new(TkPeriodMatrix { inner: pm }));
        Ok(())
    })
}

/// Seeded random period matrix, as drawn by the CLI's `--sample g,seed,scale`.
///
/// # Safety
/// `out_pm` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tk_period_matrix_sample(g: usize, seed: u64, offdiag_scale: f64, out_pm: *mut *mut TkPeriodMatrix) -> TkStatus {
    guard(|| {
        let out_pm = out(out_pm, "out_pm")?;
        let pm = sample_siegel(g, seed, offdiag_scale)?;
        *out_pm = Box::into_raw(Box::new(TkPeriodMatrix { inner: pm }));
        Ok(())
    })
}

/// Genus of `pm`, or 0 for a null handle.
///
/// # Safety
/// `pm` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tk_period_matrix_genus(pm: *const TkPeriodMatrix) -> usize {
    pm.as_ref().map_or(0, |h| h.inner.genus())
}

/// Copies the `g * g` row-major entries into `out_entries`.
///
/// # Safety
/// `pm` must be a live handle and `out_entries` must hold `g * g` values.
#[no_mangle]
pub unsafe extern "C" fn tk_period_matrix_entries(pm: *const TkPeriodMatrix, out_entries: *mut TkComplex) -> TkStatus {
    guard(|| {
        let pm = handle(pm)?;
        let g = pm.genus();
        if out_entries.is_null() {
            return Err(Failure::Null("out_entries"));
        }
        let dst = std::slice::from_raw_parts_mut(out_entries, g * g);
        for i in 0..g {
            for j in 0..g {
                dst[i * g + j] = pm.matrix()[(i, j)].into();
            }
        }
        Ok(())
    })
}

/// # Safety
/// `pm` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn tk_period_matrix_free(pm: *mut TkPeriodMatrix) {
    if !pm.is_null() {
        drop(Box::from_raw(pm));
    }
}

/// `∂_{d_1}…∂_{d_n} θ(z)` with `n = ndirs ≤ 3`; `dirs` holds the directions
/// back to back.
///
/// # Safety
/// `z` holds `g` values, `dirs` holds `ndirs * g` values, `out_value` is writable.
#[no_mangle]
pub unsafe extern "C" fn tk_theta_eval(
    pm: *const TkPeriodMatrix,
    z: *const TkComplex,
    ndirs: usize,
    dirs: *const TkComplex,
    tol: f64,
    out_value: *mut TkThetaValue,
) -> TkStatus {
    guard(|| {
        let pm = handle(pm)?;
        let (z, spec) = theta_args(pm.genus(), z, ndirs, dirs)?;
        *out(out_value, "out_value")? = theta_value(theta_eval(pm, &z, &spec, tol)?);
        Ok(())
    })
}

/// Second-order theta `Θ[ε](z)` with `g` characteristic bits in `eps`.
///
/// # Safety
/// As [`tk_theta_eval`], and `eps` holds `g` bytes.
#[no_mangle]
pub unsafe extern "C" fn tk_theta_char_eval(
    pm: *const TkPeriodMatrix,
    eps: *const u8,
    z: *const TkComplex,
    ndirs: usize,
    dirs: *const TkComplex,
    tol: f64,
    out_value: *mut TkThetaValue,
) -> TkStatus {
    guard(|| {
        let pm = handle(pm)?;
        let g = pm.genus();
        let eps = ThetaCharacteristic::new(slice(eps, g, "eps")?.to_vec())?;
        let (z, spec) = theta_args(g, z, ndirs, dirs)?;
        *out(out_value, "out_value")? = theta_value(theta_char_eval(pm, &eps, &z, &spec, tol)?);
        Ok(())
    })
}

unsafe fn theta_args(g: usize, z: *const TkComplex, ndirs: usize, dirs: *const TkComplex) -> Result<(CPoint, DerivSpec), Failure> {
    let z = point(z, g, "z")?;
    let raw = slice(dirs, ndirs * g, "dirs")?;
    let dirs: Vec<CPoint> = raw.chunks(g.max(1)).map(|c| CPoint::new(c.iter().map(|&x| x.into()).collect())).collect();
    let refs: Vec<&CPoint> = dirs.iter().collect();
    Ok((z, DerivSpec::of(&refs)))
}

fn theta_value(v: theta_kummer::theta::ThetaValue) -> TkThetaValue {
    TkThetaValue { value: v.value.into(), tail_bound: v.tail_bound, scale: v.scale }
}

/// Kummer vector `(Θ[ε](z))_ε` in characteristic-index order; `out_comps`
/// must hold `2^g` values.
///
/// # Safety
/// `z` holds `g` values and `out_comps` holds `2^g` values.
#[no_mangle]
pub unsafe extern "C" fn tk_kummer_map(pm: *const TkPeriodMatrix, z: *const TkComplex, tol: f64, out_comps: *mut TkComplex) -> TkStatus {
    guard(|| {
        let pm = handle(pm)?;
        let k = kummer_map(pm, &point(z, pm.genus(), "z")?, tol)?;
        if out_comps.is_null() {
            return Err(Failure::Null("out_comps"));
        }
        let dst = std::slice::from_raw_parts_mut(out_comps, k.comps.len());
        for (d, c) in dst.iter_mut().zip(&k.comps) {
            *d = (*c).into();
        }
        Ok(())
    })
}

/// Relative residual of the bilinear addition formula at `(z, Z)`.
///
/// # Safety
/// `z` and `zz` hold `g` values; `out_residual` is writable.
#[no_mangle]
pub unsafe extern "C" fn tk_bilinear_residual(
    pm: *const TkPeriodMatrix,
    z: *const TkComplex,
    zz: *const TkComplex,
    tol: f64,
    out_residual: *mut f64,
) -> TkStatus {
    guard(|| {
        let pm = handle(pm)?;
        let g = pm.genus();
        *out(out_residual, "out_residual")? = bilinear_residual(pm, &point(z, g, "z")?, &point(zz, g, "Z")?, tol)?;
        Ok(())
    })
}

/// `|K(P) − c K(0) − ∂_U∂_V K(0)| / |K(P)|`.
///
/// # Safety
/// `p`, `u`, `v` hold `g` values; `out_residual` is writable.
#[no_mangle]
pub unsafe extern "C" fn tk_gamma00_residual(
    pm: *const TkPeriodMatrix,
    p: *const TkComplex,
    u: *const TkComplex,
    v: *const TkComplex,
    c: TkComplex,
    tol: f64,
    out_residual: *mut f64,
) -> TkStatus {
    guard(|| {
        let pm = handle(pm)?;
        let g = pm.genus();
        let inst = Gamma00Instance::new(pm.clone(), point(p, g, "P")?, point(u, g, "U")?, point(v, g, "V")?, c.into())?;
        *out(out_residual, "out_residual")? = gamma00_residual(&inst, tol)?;
        Ok(())
    })
}

/// Fits `c` and `b` in `K(P) ≈ c K(0) + b ∂_U∂_V K(0)`.
///
/// # Safety
/// `p`, `u`, `v` hold `g` values; `out_fit` is writable.
#[no_mangle]
pub unsafe extern "C" fn tk_gamma00_fit(
    pm: *const TkPeriodMatrix,
    p: *const TkComplex,
    u: *const TkComplex,
    v: *const TkComplex,
    tol: f64,
    out_fit: *mut TkFit,
) -> TkStatus {
    guard(|| {
        let pm = handle(pm)?;
        let g = pm.genus();
        let fit = gamma00_fit(pm, &point(p, g, "P")?, &point(u, g, "U")?, &point(v, g, "V")?, tol)?;
        *out(out_fit, "out_fit")? = TkFit { c: fit.c.into(), b: fit.b.into(), rel_residual: fit.rel_residual };
        Ok(())
    })
}

/// Collinearity ratio `σ3/σ1` of the trisecant triple built from `p, p1, p2, p3`.
///
/// # Safety
/// Each point holds `g` values; `out_residual` is writable.
#[no_mangle]
pub unsafe extern "C" fn tk_trisecant_residual(
    pm: *const TkPeriodMatrix,
    p: *const TkComplex,
    p1: *const TkComplex,
    p2: *const TkComplex,
    p3: *const TkComplex,
    tol: f64,
    out_residual: *mut f64,
) -> TkStatus {
    guard(|| {
        let pm = handle(pm)?;
        let g = pm.genus();
        let r = trisecant_residual(pm, &point(p, g, "p")?, &point(p1, g, "p1")?, &point(p2, g, "p2")?, &point(p3, g, "p3")?, tol)?;
        *out(out_residual, "out_residual")? = r;
        Ok(())
    })
}

/// Collinearity ratio of the semidegenerate triple at `p, p1, q` with tangent `U`.
///
/// # Safety
/// Each point holds `g` values; `out_residual` is writable.
#[no_mangle]
pub unsafe extern "C" fn tk_semidegenerate_residual(
    pm: *const TkPeriodMatrix,
    p: *const TkComplex,
    p1: *const TkComplex,
    q: *const TkComplex,
    u: *const TkComplex,
    tol: f64,
    out_residual: *mut f64,
) -> TkStatus {
    guard(|| {
        let pm = handle(pm)?;
        let g = pm.genus();
        let r = semidegenerate_residual(pm, &point(p, g, "p")?, &point(p1, g, "p1")?, &point(q, g, "q")?, &point(u, g, "U")?, tol)?;
        *out(out_residual, "out_residual")? = r;
        Ok(())
    })
}

/// Residual of the on-divisor identity at `z` for direction `U` and shift `P`.
///
/// # Safety
/// Each point holds `g` values; `out_residual` is writable.
#[no_mangle]
pub unsafe extern "C" fn tk_divisor_identity_residual(
    pm: *const TkPeriodMatrix,
    z: *const TkComplex,
    u: *const TkComplex,
    p: *const TkComplex,
    tol: f64,
    out_residual: *mut f64,
) -> TkStatus {
    guard(|| {
        let pm = handle(pm)?;
        let g = pm.genus();
        let dp = DivisorPoint::evaluate(pm, &point(z, g, "z")?, tol)?;
        *out(out_residual, "out_residual")? = divisor_identity_residual(pm, &dp, &point(u, g, "U")?, &point(p, g, "P")?, tol)?;
        Ok(())
    })
}

/// Runs the genus-2 pipeline and returns its report as JSON in `out_json`;
/// free it with [`tk_string_free`].
///
/// # Safety
/// `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tk_genus2_pipeline_json(pm: *const TkPeriodMatrix, seed: u64, tol: f64, out_json: *mut *mut c_char) -> TkStatus {
    guard(|| {
        let pm = handle(pm)?;
        let out_json = out(out_json, "out_json")?;
        *out_json = json_string(serde_json::to_string(&genus2_pipeline(pm, seed, tol)?))?.into_raw();
        Ok(())
    })
}

/// Exploratory random-start search for small `gamma00` residuals; JSON report
/// in `out_json`, freed with [`tk_string_free`].
///
/// # Safety
/// `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tk_scan_json(pm: *const TkPeriodMatrix, iters: usize, seed: u64, tol: f64, out_json: *mut *mut c_char) -> TkStatus {
    guard(|| {
        let pm = handle(pm)?;
        let out_json = out(out_json, "out_json")?;
        *out_json = json_string(serde_json::to_string(&scan_min_residual(pm, iters, seed, tol)?))?.into_raw();
        Ok(())
    })
}

/// Message of the last failure on this thread, or null if the last call
/// succeeded. Free it with [`tk_string_free`].
#[no_mangle]
pub extern "C" fn tk_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| match e.borrow().as_deref() {
        Some(msg) => CString::new(msg.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw),
        None => ptr::null_mut(),
    })
}

/// Static name of a status code, e.g. `"PoleAtArgument"`.
#[no_mangle]
pub extern "C" fn tk_status_name(status: TkStatus) -> *const c_char {
    let name: &'static [u8] = match status {
        TkStatus::Ok => b"Ok\0",
        TkStatus::NullPointer => b"NullPointer\0",
        TkStatus::DimensionMismatch => b"DimensionMismatch\0",
        TkStatus::NotPositiveDefinite => b"NotPositiveDefinite\0",
        TkStatus::DegenerateSystem => b"DegenerateSystem\0",
        TkStatus::NoConvergence => b"NoConvergence\0",
        TkStatus::DerivativeVanished => b"DerivativeVanished\0",
        TkStatus::RadiusOverflow => b"RadiusOverflow\0",
        TkStatus::SingularPoint => b"SingularPoint\0",
        TkStatus::PoleAtArgument => b"PoleAtArgument\0",
        TkStatus::IndecomposabilityCheckFailed => b"IndecomposabilityCheckFailed\0",
        TkStatus::NonFinite => b"NonFinite\0",
        TkStatus::InvalidInput => b"InvalidInput\0",
        TkStatus::Panic => b"Panic\0",
    };
    name.as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn tk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
