//! C interface to `rdps`.
//!
//! Every function returns an [`RdpsStatus`]; on failure a message is kept per
//! thread and can be read with [`rdps_last_error_message`]. Handles are
//! opaque, created by the `*_new`/builder functions and released with the
//! matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use rdps::full::{full_cps, full_rdps, full_rdps_deleted, ConformityKind, FullStrategy};
use rdps::regress::RegressorSpec;
use rdps::split::{split_system, ResidualTransform, ScaleSource, SplitConfig};
use rdps::{Dataset, Error, PredictiveSystem, SplitIndex};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdpsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Unsupported = 3,
    NotMonotone = 4,
    Numerical = 5,
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdpsBackend {
    Ols = 0,
    /// Laplacian-kernel ridge regression; uses `gamma` and `lambda`.
    Krr = 1,
    /// Kernel smoother; uses `bandwidth`, `trim_lo` and `trim_hi`.
    Smoother = 2,
}

/// Point regressor description. Unused fields are ignored.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RdpsRegressor {
    pub backend: RdpsBackend,
    pub gamma: f64,
    pub lambda: f64,
    pub bandwidth: f64,
    /// Pass -INFINITY and INFINITY to disable clipping.
    pub trim_lo: f64,
    pub trim_hi: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdpsStrategy {
    LinearExact = 0,
    MonotoneLimits = 1,
    /// Evenly spaced refits; uses `grid_points`.
    Grid = 2,
}

pub struct RdpsDataset(Dataset);

pub struct RdpsSystem(PredictiveSystem);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> RdpsStatus {
    match e {
        Error::Capability(_) | Error::NotMonotoneDifference { .. } => RdpsStatus::Unsupported,
        Error::NotMonotone { .. } => RdpsStatus::NotMonotone,
        Error::RankDeficient { .. } | Error::Singular { .. } | Error::LeverageOne { .. } => RdpsStatus::Numerical,
        Error::InvalidStepFn(_) | Error::Io { .. } | Error::Parse { .. } => RdpsStatus::Internal,
        _ => RdpsStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status and a message.
fn guard(f: impl FnOnce() -> Result<(), (RdpsStatus, String)>) -> RdpsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            RdpsStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RdpsStatus::Internal
        }
    }
}

fn lib<T>(r: rdps::Result<T>) -> Result<T, (RdpsStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (RdpsStatus, String) {
    (RdpsStatus::NullPointer, format!("null pointer: {what}"))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], (RdpsStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn dataset<'a>(d: *const RdpsDataset) -> Result<&'a Dataset, (RdpsStatus, String)> {
    d.as_ref().map(|d| &d.0).ok_or_else(|| null("dataset"))
}

unsafe fn system<'a>(s: *const RdpsSystem) -> Result<&'a PredictiveSystem, (RdpsStatus, String)> {
    s.as_ref().map(|s| &s.0).ok_or_else(|| null("system"))
}

fn spec(r: &RdpsRegressor) -> RegressorSpec {
    match r.backend {
        RdpsBackend::Ols => RegressorSpec::ols(),
        RdpsBackend::Krr => RegressorSpec::Krr {
            gamma: r.gamma,
            lambda: r.lambda,
        },
        RdpsBackend::Smoother => RegressorSpec::KernelSmoother {
            bandwidth: r.bandwidth,
            trim_lo: r.trim_lo,
            trim_hi: r.trim_hi,
        },
    }
}

unsafe fn emit(out: *mut *mut RdpsSystem, ps: PredictiveSystem) {
    *out = Box::into_raw(Box::new(RdpsSystem(ps)));
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn rdps_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a dataset from `n` row-major covariate rows of length `dim` and
/// `n` outcomes.
///
/// # Safety
/// `x` must point to `n * dim` doubles, `y` to `n` doubles and `out` to
/// writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn rdps_dataset_new(
    x: *const f64,
    y: *const f64,
    n: usize,
    dim: usize,
    out: *mut *mut RdpsDataset,
) -> RdpsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let xs = slice(x, n.checked_mul(dim).ok_or((RdpsStatus::InvalidArgument, "size overflow".into()))?, "x")?;
        let ys = slice(y, n, "y")?;
        let d = lib(Dataset::from_flat(dim, xs.to_vec(), ys.to_vec()))?;
        *out = Box::into_raw(Box::new(RdpsDataset(d)));
        Ok(())
    })
}

/// # Safety
/// `d` must come from [`rdps_dataset_new`] and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn rdps_dataset_free(d: *mut RdpsDataset) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Split system: the first `estimation_size` samples fit the regressor, the
/// rest calibrate. With `scaled` set, residuals are divided by a companion
/// fit of their absolute values.
///
/// # Safety
/// `data` must be a live dataset, `x_new` must point to `dim` doubles and
/// `out` to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn rdps_split_system(
    data: *const RdpsDataset,
    regressor: RdpsRegressor,
    estimation_size: usize,
    scaled: bool,
    x_new: *const f64,
    dim: usize,
    out: *mut *mut RdpsSystem,
) -> RdpsStatus {
    guard(|| {
        let d = dataset(data)?;
        let x = slice(x_new, dim, "x_new")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let transform = if scaled {
            ResidualTransform::Scale(ScaleSource::Companion)
        } else {
            ResidualTransform::Identity
        };
        let cfg = SplitConfig::new(lib(SplitIndex::new(estimation_size))?, spec(&regressor), transform);
        emit(out, lib(split_system(d, &cfg, x))?);
        Ok(())
    })
}

/// Full conformal predictive system, studentised when `studentised` is set.
///
/// # Safety
/// As for [`rdps_split_system`].
#[no_mangle]
pub unsafe extern "C" fn rdps_full_cps(
    data: *const RdpsDataset,
    regressor: RdpsRegressor,
    studentised: bool,
    x_new: *const f64,
    dim: usize,
    out: *mut *mut RdpsSystem,
) -> RdpsStatus {
    guard(|| {
        let d = dataset(data)?;
        let x = slice(x_new, dim, "x_new")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let kind = if studentised {
            ConformityKind::Studentised
        } else {
            ConformityKind::Plain
        };
        emit(out, lib(full_cps(d, &spec(&regressor), kind, x))?);
        Ok(())
    })
}

/// Full residual-distribution system. A positive `trim_fraction` refits
/// after dropping that share of the largest residuals and needs the grid
/// strategy. Grids span three outcome ranges beyond the data on each side.
///
/// # Safety
/// As for [`rdps_split_system`].
#[no_mangle]
pub unsafe extern "C" fn rdps_full_rdps(
    data: *const RdpsDataset,
    regressor: RdpsRegressor,
    strategy: RdpsStrategy,
    grid_points: usize,
    trim_fraction: f64,
    x_new: *const f64,
    dim: usize,
    out: *mut *mut RdpsSystem,
) -> RdpsStatus {
    guard(|| {
        let d = dataset(data)?;
        let x = slice(x_new, dim, "x_new")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = match strategy {
            RdpsStrategy::LinearExact => FullStrategy::LinearExact,
            RdpsStrategy::MonotoneLimits => FullStrategy::MonotoneLimits,
            RdpsStrategy::Grid => FullStrategy::grid_around(d.ys(), 3.0, grid_points),
        };
        let sp = spec(&regressor);
        let ps = if trim_fraction > 0.0 {
            lib(full_rdps_deleted(d, &sp, trim_fraction, x, &s))?
        } else {
            lib(full_rdps(d, &sp, x, &s))?
        };
        emit(out, ps);
        Ok(())
    })
}

/// # Safety
/// `s` must come from a builder and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn rdps_system_free(s: *mut RdpsSystem) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Bound values at `y`. The lower bound is reported right-continuous.
///
/// # Safety
/// `s` must be live; `lower` and `upper` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rdps_system_eval(s: *const RdpsSystem, y: f64, lower: *mut f64, upper: *mut f64) -> RdpsStatus {
    guard(|| {
        let ps = system(s)?;
        if lower.is_null() || upper.is_null() {
            return Err(null("lower/upper"));
        }
        *lower = ps.lower().eval(y);
        *upper = ps.upper().eval(y);
        Ok(())
    })
}

/// # Safety
/// `s` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rdps_system_thickness(s: *const RdpsSystem, out: *mut f64) -> RdpsStatus {
    guard(|| {
        let ps = system(s)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ps.thickness();
        Ok(())
    })
}

/// Central interval at `level` in (0, 1). Endpoints may be infinite.
///
/// # Safety
/// `s` must be live; `lo` and `hi` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rdps_system_central_interval(s: *const RdpsSystem, level: f64, lo: *mut f64, hi: *mut f64) -> RdpsStatus {
    guard(|| {
        let ps = system(s)?;
        if lo.is_null() || hi.is_null() {
            return Err(null("lo/hi"));
        }
        let iv = lib(ps.central_interval(1.0 - level))?;
        *lo = iv.lo;
        *hi = iv.hi;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_error_maps_to_a_nonzero_status() {
        let errs = [
            Error::Empty("x"),
            Error::Capability("c".into()),
            Error::Singular { rcond: 0.0 },
            Error::InvalidStepFn("s".into()),
        ];
        for e in errs {
            assert_ne!(status_of(&e), RdpsStatus::Ok);
        }
    }

    #[test]
    fn panics_become_internal() {
        assert_eq!(guard(|| panic!("boom")), RdpsStatus::Internal);
    }
}
