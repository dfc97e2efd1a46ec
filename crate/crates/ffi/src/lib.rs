//! C ABI over `circle_singular`.
//!
//! Objects cross the boundary as opaque handles created by a `*_new` or
//! `*_build` call and released with the matching `*_free`. Every fallible
//! call returns a [`CsStatus`]; on failure a message for the calling thread
//! is available from [`cs_last_error_message`]. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use circle_singular::asym::{build_nu, AsymConfig};
use circle_singular::cantor::{build, gauge_cover_sum, Gauge, OffsetMode, RankedIntervalSystem};
use circle_singular::circle::CoeffWindow;
use circle_singular::cli::{run, RunConfig};
use circle_singular::dims::fourier_dim_fit;
use circle_singular::hardy::{taylor_coeff, TaylorRequest};
use circle_singular::Error;
use num_complex::Complex64;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// A numeric precondition or certificate failed.
    Numeric = 3,
    BufferTooSmall = 4,
    Io = 5,
    Panic = 6,
}

/// Offset rule for [`cs_system_build`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsOffsetMode {
    Random = 0,
    Zero = 1,
}

/// A value with its error bound.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CsCertified {
    pub re: f64,
    pub im: f64,
    pub error_bound: f64,
}

/// Opaque nested interval system.
pub struct CsSystem(RankedIntervalSystem);

/// Opaque window of Fourier coefficients.
pub struct CsWindow(CoeffWindow);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CsStatus {
    match e {
        Error::InvalidParameter { .. } | Error::IncreaseNMax { .. } | Error::IndexOverflow { .. } => {
            CsStatus::InvalidArgument
        }
        Error::Io(_) | Error::Serde(_) => CsStatus::Io,
        _ => CsStatus::Numeric,
    }
}

fn fail(status: CsStatus, msg: impl Into<String>) -> CsStatus {
    set_error(msg.into());
    status
}

fn from_err(e: Error) -> CsStatus {
    let s = status_of(&e);
    fail(s, e.to_string())
}

/// Runs `f`, turning panics into [`CsStatus::Panic`].
fn guard(f: impl FnOnce() -> CsStatus) -> CsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(CsStatus::Panic, msg)
        }
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(CsStatus::NullPointer, concat!("`", stringify!($p), "` is null"));
        })+
    };
}

/// Message of the last failure on this thread, or null if none.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds the system for `seed` up to rank `n_max`.
///
/// # Safety
/// `mode` must be a [`CsOffsetMode`] value and `out` valid for a pointer
/// write. The handle written there must be released with [`cs_system_free`].
#[no_mangle]
pub unsafe extern "C" fn cs_system_build(
    seed: u64,
    n_max: usize,
    mode: CsOffsetMode,
    out: *mut *mut CsSystem,
) -> CsStatus {
    guard(|| {
        non_null!(out);
        let mode = match mode {
            CsOffsetMode::Random => OffsetMode::Random,
            CsOffsetMode::Zero => OffsetMode::Zero,
        };
        match build(seed, n_max, mode) {
            Ok(sys) => {
                *out = Box::into_raw(Box::new(CsSystem(sys)));
                CsStatus::Ok
            }
            Err(e) => from_err(e),
        }
    })
}

/// Releases a system. Null is ignored.
///
/// # Safety
/// `sys` must be null or a handle from [`cs_system_build`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_system_free(sys: *mut CsSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Rank-`n` interval length `σ_n`.
///
/// # Safety
/// `sys` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn cs_system_sigma(sys: *const CsSystem, n: usize, out: *mut f64) -> CsStatus {
    guard(|| {
        non_null!(sys, out);
        let s = &(*sys).0;
        if let Err(e) = s.check_rank(n) {
            return from_err(e);
        }
        *out = s.sigma(n);
        CsStatus::Ok
    })
}

/// Copies the `2^n` rank-`n` left endpoints into `buf`.
///
/// `written` always receives the number of endpoints. When `len` is too
/// small nothing is copied and [`CsStatus::BufferTooSmall`] is returned, so a
/// first call with `len = 0` sizes the buffer.
///
/// # Safety
/// `sys` must be a live handle, `written` valid for a write and `buf` valid
/// for `len` writes (it may be null when `len` is 0).
#[no_mangle]
pub unsafe extern "C" fn cs_system_lefts(
    sys: *const CsSystem,
    n: usize,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> CsStatus {
    guard(|| {
        non_null!(sys, written);
        let s = &(*sys).0;
        if let Err(e) = s.check_rank(n) {
            return from_err(e);
        }
        let lefts = s.lefts(n);
        *written = lefts.len();
        if len < lefts.len() {
            return fail(CsStatus::BufferTooSmall, format!("need {} slots, got {len}", lefts.len()));
        }
        non_null!(buf);
        ptr::copy_nonoverlapping(lefts.as_ptr(), buf, lefts.len());
        CsStatus::Ok
    })
}

/// Checks nesting and measure invariants at every rank.
///
/// # Safety
/// `sys` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_system_verify(sys: *const CsSystem) -> CsStatus {
    guard(|| {
        non_null!(sys);
        match (*sys).0.verify() {
            Ok(()) => CsStatus::Ok,
            Err(e) => from_err(e),
        }
    })
}

/// `2^n · σ_n log(1/σ_n)`.
///
/// # Safety
/// `sys` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn cs_gauge_cover_sum(sys: *const CsSystem, n: usize, out: *mut f64) -> CsStatus {
    guard(|| {
        non_null!(sys, out);
        match gauge_cover_sum(&(*sys).0, n, Gauge::TLogOneOverT) {
            Ok(v) => {
                *out = v;
                CsStatus::Ok
            }
            Err(e) => from_err(e),
        }
    })
}

/// Taylor coefficient `F̂(m)` at the default stage for `m`.
///
/// # Safety
/// `sys` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn cs_taylor_coeff(
    sys: *const CsSystem,
    delta: f64,
    m: i64,
    c_log: f64,
    out: *mut CsCertified,
) -> CsStatus {
    guard(|| {
        non_null!(sys, out);
        let req = TaylorRequest {
            c_log,
            ..TaylorRequest::new(m)
        };
        match taylor_coeff(&(*sys).0, delta, &req) {
            Ok(r) => {
                *out = CsCertified {
                    re: r.value.re,
                    im: r.value.im,
                    error_bound: r.error_bound,
                };
                CsStatus::Ok
            }
            Err(e) => from_err(e),
        }
    })
}

/// Window on `[lo, hi]` from `hi - lo + 1` real and imaginary parts. `im`
/// may be null for a real window.
///
/// # Safety
/// `re` (and `im` when non-null) must be valid for `hi - lo + 1` reads and
/// `out` valid for a pointer write. Release with [`cs_window_free`].
#[no_mangle]
pub unsafe extern "C" fn cs_window_new(
    lo: i64,
    hi: i64,
    re: *const f64,
    im: *const f64,
    out: *mut *mut CsWindow,
) -> CsStatus {
    guard(|| {
        non_null!(re, out);
        if hi < lo {
            return fail(CsStatus::InvalidArgument, format!("empty window [{lo}, {hi}]"));
        }
        let Some(len) = hi.checked_sub(lo).and_then(|d| usize::try_from(d).ok()).and_then(|d| d.checked_add(1)) else {
            return fail(CsStatus::InvalidArgument, "window too large");
        };
        let re = std::slice::from_raw_parts(re, len);
        let values: Vec<Complex64> = if im.is_null() {
            re.iter().map(|&r| Complex64::new(r, 0.0)).collect()
        } else {
            let im = std::slice::from_raw_parts(im, len);
            re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect()
        };
        match CoeffWindow::new(lo, hi, values) {
            Ok(w) => {
                *out = Box::into_raw(Box::new(CsWindow(w)));
                CsStatus::Ok
            }
            Err(e) => from_err(e),
        }
    })
}

/// Releases a window. Null is ignored.
///
/// # Safety
/// `w` must be null or a live window handle.
#[no_mangle]
pub unsafe extern "C" fn cs_window_free(w: *mut CsWindow) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Index range of a window.
///
/// # Safety
/// `w` must be a live handle; `lo` and `hi` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cs_window_bounds(w: *const CsWindow, lo: *mut i64, hi: *mut i64) -> CsStatus {
    guard(|| {
        non_null!(w, lo, hi);
        *lo = (*w).0.lo();
        *hi = (*w).0.hi();
        CsStatus::Ok
    })
}

/// Coefficient at `m`, zero outside the window.
///
/// # Safety
/// `w` must be a live handle; `re` and `im` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cs_window_get(w: *const CsWindow, m: i64, re: *mut f64, im: *mut f64) -> CsStatus {
    guard(|| {
        non_null!(w, re, im);
        let v = (*w).0.get_or_zero(m);
        *re = v.re;
        *im = v.im;
        CsStatus::Ok
    })
}

/// Fourier dimension estimate from the block envelope of `|μ̂|²`.
///
/// # Safety
/// `w` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn cs_fourier_dim_fit(w: *const CsWindow, out: *mut f64) -> CsStatus {
    guard(|| {
        non_null!(w, out);
        match fourier_dim_fit(&(*w).0) {
            Ok(v) => {
                *out = v.estimate;
                CsStatus::Ok
            }
            Err(e) => from_err(e),
        }
    })
}

/// Builds the asymmetric measure over `mu` and returns its coefficients.
///
/// # Safety
/// `mu` must be a live handle and `out` valid for a pointer write. Release
/// the result with [`cs_window_free`].
#[no_mangle]
pub unsafe extern "C" fn cs_build_nu(mu: *const CsWindow, p: f64, k_max: usize, out: *mut *mut CsWindow) -> CsStatus {
    guard(|| {
        non_null!(mu, out);
        match build_nu(&(*mu).0, &AsymConfig::new(p, k_max)) {
            Ok((nu, _)) => {
                *out = Box::into_raw(Box::new(CsWindow(nu.nu_hat)));
                CsStatus::Ok
            }
            Err(e) => from_err(e),
        }
    })
}

/// Runs a pipeline from a JSON config and returns the manifest as JSON.
///
/// Artifacts are written as by the command-line tool. The manifest records
/// failed checks; only execution errors produce a non-`Ok` status.
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `out` valid for a
/// pointer write. Release the result with [`cs_string_free`].
#[no_mangle]
pub unsafe extern "C" fn cs_run_json(config_json: *const c_char, out: *mut *mut c_char) -> CsStatus {
    guard(|| {
        non_null!(config_json, out);
        let Ok(text) = CStr::from_ptr(config_json).to_str() else {
            return fail(CsStatus::InvalidArgument, "config is not UTF-8");
        };
        let config = match RunConfig::from_json(text) {
            Ok(c) => c,
            Err(e) => return from_err(e),
        };
        let manifest = match run(&config) {
            Ok(m) => m,
            Err(e) => {
                let s = status_of(&e.source);
                return fail(s, e.to_string());
            }
        };
        let json = serde_json::to_string(&manifest).expect("manifest serializes");
        *out = CString::new(json).expect("JSON has no NUL").into_raw();
        CsStatus::Ok
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from [`cs_run_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
