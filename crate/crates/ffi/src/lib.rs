//! C ABI over `steinclt`.
//!
//! Every fallible function returns a [`SteincltStatus`] and writes its result
//! through an out-pointer. On failure a message is available from
//! [`steinclt_last_error_message`] until the next call on the same thread.
//! Models are opaque handles owned by the caller and released with
//! [`steinclt_model_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use steinclt::bias::{Family, SumModel};
use steinclt::smoothing::constants_c;
use steinclt::tensor::SymTensor;
use steinclt::wasserstein::{rate_fit, w1_estimate, w1_exact, EmpiricalMeasure};
use steinclt::{bound_m1, bound_m2, bound_m3, Error};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteincltStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    UnknownFamily = 4,
    MissingMoment = 5,
    Numerical = 6,
    Panic = 7,
}

/// The three bound totals of a model.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SteincltBounds {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
}

/// A replicated `W1` estimate with its 95% bootstrap interval.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SteincltW1 {
    pub value: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Opaque standardized i.i.d. sum model.
pub struct SteincltModel {
    model: SumModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SteincltStatus {
    match e {
        Error::DimensionMismatch { .. } | Error::SizeMismatch { .. } => SteincltStatus::DimensionMismatch,
        Error::UnknownFamily { .. } => SteincltStatus::UnknownFamily,
        Error::MissingMoment { .. } | Error::MissingDerivative { .. } => SteincltStatus::MissingMoment,
        Error::InvalidArgument(_) | Error::NotCentered { .. } | Error::NegativeSupport(_) | Error::Config(_) => {
            SteincltStatus::InvalidArgument
        }
        Error::Io(_) => SteincltStatus::Numerical,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), (SteincltStatus, String)>>(f: F) -> SteincltStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SteincltStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SteincltStatus::Panic
        }
    }
}

fn lib<T>(r: steinclt::Result<T>) -> Result<T, (SteincltStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (SteincltStatus, String) {
    (SteincltStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: &str) -> (SteincltStatus, String) {
    (SteincltStatus::InvalidArgument, msg.to_string())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn steinclt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library from this thread.
#[no_mangle]
pub extern "C" fn steinclt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Builds the standardized sum of `n` i.i.d. copies of `family` in `R^d`.
/// `p` is the two-point probability (pass a NaN for the default).
///
/// # Safety
/// `family` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn steinclt_model_new(
    family: *const c_char,
    d: usize,
    n: usize,
    p: f64,
    out: *mut *mut SteincltModel,
) -> SteincltStatus {
    guard(|| {
        if family.is_null() {
            return Err(null("family"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let name = CStr::from_ptr(family)
            .to_str()
            .map_err(|_| invalid("family is not UTF-8"))?;
        let fam = lib(Family::parse(name, if p.is_nan() { None } else { Some(p) }))?;
        let model = lib(SumModel::iid_standardized(fam, d, n))?;
        *out = Box::into_raw(Box::new(SteincltModel { model }));
        Ok(())
    })
}

/// Releases a model; NULL is ignored.
///
/// # Safety
/// `model` must come from [`steinclt_model_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn steinclt_model_free(model: *mut SteincltModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn steinclt_model_dim(model: *const SteincltModel, out: *mut usize) -> SteincltStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let o = out.as_mut().ok_or_else(|| null("out"))?;
        *o = m.model.dim();
        Ok(())
    })
}

/// Evaluates the M1, M2 and M3 bound totals.
///
/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn steinclt_model_bounds(model: *const SteincltModel, out: *mut SteincltBounds) -> SteincltStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let o = out.as_mut().ok_or_else(|| null("out"))?;
        *o = SteincltBounds {
            m1: lib(bound_m1(&m.model))?.total,
            m2: lib(bound_m2(&m.model))?.total,
            m3: lib(bound_m3(&m.model))?.total,
        };
        Ok(())
    })
}

/// Replicated empirical `W1` between the model and the standard normal.
///
/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn steinclt_model_w1_estimate(
    model: *const SteincltModel,
    m: usize,
    replications: usize,
    seed: u64,
    out: *mut SteincltW1,
) -> SteincltStatus {
    guard(|| {
        let md = model.as_ref().ok_or_else(|| null("model"))?;
        let o = out.as_mut().ok_or_else(|| null("out"))?;
        let e = lib(w1_estimate(&md.model, m, replications, seed))?;
        *o = SteincltW1 {
            value: e.value,
            ci_lo: e.ci.0,
            ci_hi: e.ci.1,
        };
        Ok(())
    })
}

/// Exact `W1` between two clouds of `m` points in `R^d`, row-major.
///
/// # Safety
/// `a` and `b` must point to `m * d` doubles each; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn steinclt_w1_exact(
    a: *const f64,
    b: *const f64,
    m: usize,
    d: usize,
    out: *mut f64,
) -> SteincltStatus {
    guard(|| {
        if a.is_null() || b.is_null() {
            return Err(null("point buffer"));
        }
        let o = out.as_mut().ok_or_else(|| null("out"))?;
        let len = m.checked_mul(d).ok_or_else(|| invalid("m * d overflows"))?;
        let pa = lib(EmpiricalMeasure::new(d, std::slice::from_raw_parts(a, len).to_vec()))?;
        let pb = lib(EmpiricalMeasure::new(d, std::slice::from_raw_parts(b, len).to_vec()))?;
        *o = lib(w1_exact(&pa, &pb))?;
        Ok(())
    })
}

/// The smoothing constant `c_s`, `0 <= s <= 3`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn steinclt_constant_c(s: usize, out: *mut f64) -> SteincltStatus {
    guard(|| {
        let o = out.as_mut().ok_or_else(|| null("out"))?;
        *o = lib(constants_c(s))?;
        Ok(())
    })
}

/// Injective norm of a symmetric tensor given as a full `dim^order`
/// row-major array; asymmetric input is rejected.
///
/// # Safety
/// `entries` must point to `dim^order` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn steinclt_injective_norm(
    entries: *const f64,
    order: usize,
    dim: usize,
    out: *mut f64,
) -> SteincltStatus {
    guard(|| {
        if entries.is_null() {
            return Err(null("entries"));
        }
        let o = out.as_mut().ok_or_else(|| null("out"))?;
        if order == 0 || dim == 0 || order > 8 {
            return Err(invalid("need 1 <= order <= 8 and dim >= 1"));
        }
        let len = dim
            .checked_pow(order as u32)
            .ok_or_else(|| invalid("tensor too large"))?;
        let full = std::slice::from_raw_parts(entries, len);
        let flat = |idx: &[usize]| idx.iter().fold(0, |acc, &i| acc * dim + i);
        let t = lib(SymTensor::from_fn(order, dim, |idx| full[flat(idx)]))?;
        // every permutation must agree with the canonical entry
        let mut idx = vec![0usize; order];
        for (k, &entry) in full.iter().enumerate() {
            let mut r = k;
            for slot in idx.iter_mut().rev() {
                *slot = r % dim;
                r /= dim;
            }
            let want = t.get(&idx);
            if (entry - want).abs() > 1e-12 * want.abs().max(1.0) {
                return Err(invalid("tensor is not symmetric"));
            }
        }
        *o = t.injective_norm_default();
        Ok(())
    })
}

/// Least-squares slope of `ln w` against `ln n` (at least 4 points, `n`
/// strictly increasing, all values positive).
///
/// # Safety
/// `n` and `w` must point to `len` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn steinclt_rate_fit(n: *const f64, w: *const f64, len: usize, out: *mut f64) -> SteincltStatus {
    guard(|| {
        if n.is_null() || w.is_null() {
            return Err(null("input buffer"));
        }
        let o = out.as_mut().ok_or_else(|| null("out"))?;
        let ns = std::slice::from_raw_parts(n, len);
        let ws = std::slice::from_raw_parts(w, len);
        let pts: Vec<(f64, f64)> = ns.iter().copied().zip(ws.iter().copied()).collect();
        *o = lib(rate_fit(&pts))?;
        Ok(())
    })
}
