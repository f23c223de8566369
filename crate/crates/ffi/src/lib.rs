//! C ABI for `spherical_sensing`.
//!
//! Every fallible function returns an [`SsStatus`] and writes its result
//! through an out-pointer. On failure a message is available from
//! [`ss_last_error_message`] until the next call on the same thread.
//! Handles ([`SsModel`], [`SsRoc`]) are opaque and must be released with
//! their `_free` function.

// Entry points are called from C, where `unsafe` carries no meaning; every
// pointer argument is null-checked before use instead.
#![allow(clippy::not_unsafe_ptr_arg_deref)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use spherical_sensing::analytic;
use spherical_sensing::detectors::DetectorKind;
use spherical_sensing::linalg::{ChannelMode, CovarianceModel};
use spherical_sensing::rng::{stream, Domain};
use spherical_sensing::simulate::{run_hypothesis_with, run_model, Scenario};
use spherical_sensing::{Error, Hypothesis, RocCurve};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsStatus {
    Ok = 0,
    ErrDomain = 1,
    ErrConvergence = 2,
    ErrNotHermitian = 3,
    ErrNullPointer = 4,
    ErrBufferTooSmall = 5,
    ErrPanic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsDetector {
    St = 0,
    Er = 1,
    John = 2,
    Le = 3,
    Sle = 4,
    Ed = 5,
}

impl From<SsDetector> for DetectorKind {
    fn from(d: SsDetector) -> Self {
        match d {
            SsDetector::St => DetectorKind::St,
            SsDetector::Er => DetectorKind::Er,
            SsDetector::John => DetectorKind::John,
            SsDetector::Le => DetectorKind::Le,
            SsDetector::Sle => DetectorKind::Sle,
            SsDetector::Ed => DetectorKind::Ed,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsChannelMode {
    Independent = 0,
    Orthonormal = 1,
}

/// Moment-matched Beta law.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsBetaParams {
    pub alpha: f64,
    pub beta: f64,
}

/// Population covariance model (opaque).
pub struct SsModel(CovarianceModel);

/// ROC curve (opaque).
pub struct SsRoc(RocCurve);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: SsStatus, msg: &str) -> SsStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> SsStatus {
    let status = match e {
        Error::Domain(_) => SsStatus::ErrDomain,
        Error::Convergence(_) => SsStatus::ErrConvergence,
        Error::NotHermitian(_) => SsStatus::ErrNotHermitian,
    };
    fail(status, &e.to_string())
}

/// Run `f`, mapping errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), SsStatus>) -> SsStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SsStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(SsStatus::ErrPanic, "internal panic"),
    }
}

trait IntoStatus<T> {
    fn status(self) -> Result<T, SsStatus>;
}

impl<T> IntoStatus<T> for spherical_sensing::Result<T> {
    fn status(self) -> Result<T, SsStatus> {
        self.map_err(from_error)
    }
}

fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, SsStatus> {
    // SAFETY: caller guarantees a non-null `p` is valid for writes.
    unsafe { p.as_mut() }.ok_or_else(|| fail(SsStatus::ErrNullPointer, &format!("{name} is null")))
}

fn model<'a>(p: *const SsModel) -> Result<&'a CovarianceModel, SsStatus> {
    // SAFETY: caller guarantees a non-null handle came from this library and is live.
    unsafe { p.as_ref() }.map(|m| &m.0).ok_or_else(|| fail(SsStatus::ErrNullPointer, "model is null"))
}

fn input<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], SsStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(SsStatus::ErrNullPointer, &format!("{name} is null")));
    }
    // SAFETY: caller guarantees `p` points to `len` readable doubles.
    Ok(unsafe { slice::from_raw_parts(p, len) })
}

fn output<'a>(p: *mut f64, len: usize, needed: usize, name: &str) -> Result<&'a mut [f64], SsStatus> {
    if len < needed {
        return Err(fail(SsStatus::ErrBufferTooSmall, &format!("{name} holds {len} values, {needed} needed")));
    }
    if needed == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(fail(SsStatus::ErrNullPointer, &format!("{name} is null")));
    }
    // SAFETY: caller guarantees `p` points to `len` writable doubles.
    Ok(unsafe { slice::from_raw_parts_mut(p, needed) })
}

/// Message describing the last failure on this thread; empty after success.
/// The pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn ss_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ss_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => c"unknown",
    };
    VERSION.as_ptr()
}

/// Threshold ζ with P_fa(ζ) = `pfa` for K sensors and N samples.
#[no_mangle]
pub extern "C" fn ss_threshold(k: usize, n: usize, pfa: f64, zeta_out: *mut f64) -> SsStatus {
    guard(|| {
        let o = out(zeta_out, "zeta_out")?;
        *o = analytic::threshold_for_pfa(pfa, k, n).status()?;
        Ok(())
    })
}

/// False-alarm probability of the rule "declare H1 when T < ζ".
#[no_mangle]
pub extern "C" fn ss_pfa(zeta: f64, k: usize, n: usize, pfa_out: *mut f64) -> SsStatus {
    guard(|| {
        let o = out(pfa_out, "pfa_out")?;
        *o = analytic::pfa(zeta, k, n).status()?;
        Ok(())
    })
}

/// Exact n-th moment of the statistic under H0.
#[no_mangle]
pub extern "C" fn ss_h0_moment(k: usize, n: usize, order: usize, moment_out: *mut f64) -> SsStatus {
    guard(|| {
        let o = out(moment_out, "moment_out")?;
        *o = analytic::h0_moment(k, n, order).status()?;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn ss_h0_beta(k: usize, n: usize, params_out: *mut SsBetaParams) -> SsStatus {
    guard(|| {
        let o = out(params_out, "params_out")?;
        let p = analytic::h0_beta(k, n).status()?;
        *o = SsBetaParams { alpha: p.alpha, beta: p.beta };
        Ok(())
    })
}

/// Exact null CDF for two sensors.
#[no_mangle]
pub extern "C" fn ss_h0_cdf_exact_k2(y: f64, n: usize, cdf_out: *mut f64) -> SsStatus {
    guard(|| {
        let o = out(cdf_out, "cdf_out")?;
        *o = analytic::h0_cdf_exact_k2(y, n).status()?;
        Ok(())
    })
}

/// Exact null CDF for three sensors.
#[no_mangle]
pub extern "C" fn ss_h0_cdf_exact_k3(y: f64, n: usize, cdf_out: *mut f64) -> SsStatus {
    guard(|| {
        let o = out(cdf_out, "cdf_out")?;
        *o = analytic::h0_cdf_exact_k3(y, n).status()?;
        Ok(())
    })
}

/// Exact H1 CDF for two sensors with population eigenvalues σ₁ ≥ σ₂ > 0.
#[no_mangle]
pub extern "C" fn ss_h1_cdf_exact_k2(y: f64, sigma1: f64, sigma2: f64, n: usize, cdf_out: *mut f64) -> SsStatus {
    guard(|| {
        let o = out(cdf_out, "cdf_out")?;
        *o = analytic::h1_cdf_exact_k2(y, sigma1, sigma2, n).status()?;
        Ok(())
    })
}

/// Model with the given population eigenvalues (any order, all positive).
#[no_mangle]
pub extern "C" fn ss_model_from_eigenvalues(eigs: *const f64, k: usize, model_out: *mut *mut SsModel) -> SsStatus {
    guard(|| {
        let o = out(model_out, "model_out")?;
        *o = ptr::null_mut();
        let e = input(eigs, k, "eigs")?;
        let m = CovarianceModel::diagonal(e).status()?;
        *o = Box::into_raw(Box::new(SsModel(m)));
        Ok(())
    })
}

/// Model `σ²(I + Σ snr_i u_i u_i^†)` with `p` channels drawn from `seed`.
#[no_mangle]
pub extern "C" fn ss_model_from_snrs(
    k: usize,
    sigma2: f64,
    snrs_db: *const f64,
    p: usize,
    mode: SsChannelMode,
    seed: u64,
    model_out: *mut *mut SsModel,
) -> SsStatus {
    guard(|| {
        let o = out(model_out, "model_out")?;
        *o = ptr::null_mut();
        let snrs = input(snrs_db, p, "snrs_db")?;
        let mode = match mode {
            SsChannelMode::Independent => ChannelMode::Independent,
            SsChannelMode::Orthonormal => ChannelMode::Orthonormal,
        };
        let m = spherical_sensing::linalg::build_covariance_with(
            k,
            sigma2,
            snrs,
            mode,
            &mut stream(seed, Domain::Channel, 0),
        )
        .status()?;
        *o = Box::into_raw(Box::new(SsModel(m)));
        Ok(())
    })
}

/// Release a model; null is ignored.
#[no_mangle]
pub extern "C" fn ss_model_free(model: *mut SsModel) {
    if !model.is_null() {
        // SAFETY: non-null handles come from Box::into_raw in this library.
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Number of sensors K, or 0 for a null handle.
#[no_mangle]
pub extern "C" fn ss_model_k(model: *const SsModel) -> usize {
    // SAFETY: see `model`.
    unsafe { model.as_ref() }.map_or(0, |m| m.0.k())
}

/// Copy the K population eigenvalues (descending) into `eigs_out`.
#[no_mangle]
pub extern "C" fn ss_model_eigenvalues(model: *const SsModel, eigs_out: *mut f64, len: usize) -> SsStatus {
    guard(|| {
        let m = self::model(model)?;
        output(eigs_out, len, m.k(), "eigs_out")?.copy_from_slice(m.sigma_eigs());
        Ok(())
    })
}

/// Gamma-fit n-th moment of the statistic under H1.
#[no_mangle]
pub extern "C" fn ss_h1_moment(model: *const SsModel, n: usize, order: usize, moment_out: *mut f64) -> SsStatus {
    guard(|| {
        let m = self::model(model)?;
        let o = out(moment_out, "moment_out")?;
        *o = analytic::h1_moment(m, n, order).status()?;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn ss_h1_beta(model: *const SsModel, n: usize, params_out: *mut SsBetaParams) -> SsStatus {
    guard(|| {
        let m = self::model(model)?;
        let o = out(params_out, "params_out")?;
        let p = analytic::h1_beta(m, n).status()?;
        *o = SsBetaParams { alpha: p.alpha, beta: p.beta };
        Ok(())
    })
}

/// Detection probability at threshold ζ (exact for K = 2).
#[no_mangle]
pub extern "C" fn ss_pd(zeta: f64, model: *const SsModel, n: usize, pd_out: *mut f64) -> SsStatus {
    guard(|| {
        let m = self::model(model)?;
        let o = out(pd_out, "pd_out")?;
        *o = analytic::pd(zeta, m, n).status()?;
        Ok(())
    })
}

/// Evaluate a detector statistic on K sample-covariance eigenvalues.
/// Undefined statistics yield NaN; ER on a singular spectrum yields +inf.
#[no_mangle]
pub extern "C" fn ss_statistic(detector: SsDetector, eigs: *const f64, k: usize, value_out: *mut f64) -> SsStatus {
    guard(|| {
        let o = out(value_out, "value_out")?;
        let e = input(eigs, k, "eigs")?;
        *o = DetectorKind::from(detector).evaluate(e);
        Ok(())
    })
}

/// Monte-Carlo sample of one detector statistic.
///
/// With a null `model` the data are white noise of unit power (H0);
/// otherwise they are drawn from `model`. Results depend only on `seed`.
#[no_mangle]
pub extern "C" fn ss_simulate(
    model: *const SsModel,
    k: usize,
    n: usize,
    detector: SsDetector,
    trials: usize,
    seed: u64,
    values_out: *mut f64,
    len: usize,
) -> SsStatus {
    guard(|| {
        let dst = output(values_out, len, trials, "values_out")?;
        let scenario = Scenario { trials, seed, detectors: vec![detector.into()], ..Scenario::new(k, n, Vec::new()) };
        // SAFETY: see `model`.
        let samples = match unsafe { model.as_ref() } {
            None => run_hypothesis_with(&scenario, Hypothesis::H0, 0, trials).status()?,
            Some(m) => run_model(&m.0, &scenario).status()?,
        };
        dst.copy_from_slice(&samples[0].values);
        Ok(())
    })
}

/// Analytic ROC on a strictly increasing false-alarm grid in (0, 1).
#[no_mangle]
pub extern "C" fn ss_roc_analytic(
    model: *const SsModel,
    n: usize,
    pfa_grid: *const f64,
    len: usize,
    roc_out: *mut *mut SsRoc,
) -> SsStatus {
    guard(|| {
        let o = out(roc_out, "roc_out")?;
        *o = ptr::null_mut();
        let m = self::model(model)?;
        let grid = input(pfa_grid, len, "pfa_grid")?;
        let roc = analytic::roc_analytic(m, n, grid).status()?;
        *o = Box::into_raw(Box::new(SsRoc(roc)));
        Ok(())
    })
}

/// Number of points on a ROC curve, or 0 for a null handle.
#[no_mangle]
pub extern "C" fn ss_roc_len(roc: *const SsRoc) -> usize {
    // SAFETY: non-null handles come from this library.
    unsafe { roc.as_ref() }.map_or(0, |r| r.0.points.len())
}

/// Copy the curve into two arrays of at least `ss_roc_len` doubles.
#[no_mangle]
pub extern "C" fn ss_roc_points(roc: *const SsRoc, pfa_out: *mut f64, pd_out: *mut f64, len: usize) -> SsStatus {
    guard(|| {
        // SAFETY: non-null handles come from this library.
        let r = unsafe { roc.as_ref() }.ok_or_else(|| fail(SsStatus::ErrNullPointer, "roc is null"))?;
        let n = r.0.points.len();
        let pfa = output(pfa_out, len, n, "pfa_out")?;
        let pd = output(pd_out, len, n, "pd_out")?;
        for (i, p) in r.0.points.iter().enumerate() {
            pfa[i] = p.pfa;
            pd[i] = p.pd;
        }
        Ok(())
    })
}

/// Release a ROC curve; null is ignored.
#[no_mangle]
pub extern "C" fn ss_roc_free(roc: *mut SsRoc) {
    if !roc.is_null() {
        // SAFETY: non-null handles come from Box::into_raw in this library.
        drop(unsafe { Box::from_raw(roc) });
    }
}
