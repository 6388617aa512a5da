//! C ABI for the gap-field solver: opaque handles, status codes, and a
//! thread-local last-error message.
//!
//! Ownership rules: every `*_parse`/`*_run` out-pointer hands the caller an
//! owned handle that must be released with the matching `*_free`; strings
//! returned as `char*` are released with [`npgap_string_free`].

use npgap::harness::sweep::{run_sweep, SweepRow};
use npgap::harness::ExperimentConfig;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status codes mirroring the CLI exit-code convention.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpgapStatus {
    Ok = 0,
    /// Null pointer, bad UTF-8, or out-of-range argument.
    InvalidArgument = 1,
    ConfigError = 2,
    NumericalError = 3,
    IoError = 4,
    /// A panic was caught at the boundary.
    Internal = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

fn status_of(err: &npgap::Error) -> NpgapStatus {
    match err.exit_code() {
        2 => NpgapStatus::ConfigError,
        4 => NpgapStatus::IoError,
        _ => NpgapStatus::NumericalError,
    }
}

/// Opaque parsed configuration.
pub struct NpgapConfig {
    inner: ExperimentConfig,
}

/// Opaque sweep result: rows in descending gap order.
pub struct NpgapSweep {
    rows: Vec<SweepRow>,
    failures: usize,
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn npgap_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the thread-local last error message into `buf` (truncating) and
/// returns the full message length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must point to at least `cap` writable bytes (or be null).
#[no_mangle]
pub unsafe extern "C" fn npgap_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            // Guarantee termination even when truncated.
            *buf.add(n - 1) = 0;
        }
        bytes.len() - 1
    })
}

/// Parses a TOML experiment configuration.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn npgap_config_parse(
    text: *const c_char,
    out: *mut *mut NpgapConfig,
) -> NpgapStatus {
    if text.is_null() || out.is_null() {
        set_error("null pointer argument");
        return NpgapStatus::InvalidArgument;
    }
    let s = match CStr::from_ptr(text).to_str() {
        Ok(s) => s,
        Err(_) => {
            set_error("config text is not valid UTF-8");
            return NpgapStatus::InvalidArgument;
        }
    };
    match catch_unwind(|| ExperimentConfig::parse(s)) {
        Ok(Ok(cfg)) => {
            *out = Box::into_raw(Box::new(NpgapConfig { inner: cfg }));
            NpgapStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("panic while parsing configuration");
            NpgapStatus::Internal
        }
    }
}

/// # Safety
/// `cfg` must be null or a pointer from [`npgap_config_parse`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn npgap_config_free(cfg: *mut NpgapConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs the configured sweep. Gap widths whose pipeline fails are skipped
/// and counted in [`npgap_sweep_failure_count`].
///
/// # Safety
/// `cfg` must come from [`npgap_config_parse`]; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn npgap_sweep_run(
    cfg: *const NpgapConfig,
    out: *mut *mut NpgapSweep,
) -> NpgapStatus {
    if cfg.is_null() || out.is_null() {
        set_error("null pointer argument");
        return NpgapStatus::InvalidArgument;
    }
    let config = &(*cfg).inner;
    match catch_unwind(AssertUnwindSafe(|| run_sweep(config))) {
        Ok(Ok(outcome)) => {
            let sweep = NpgapSweep {
                rows: outcome.rows.into_iter().next().unwrap_or_default(),
                failures: outcome.failures.len(),
            };
            *out = Box::into_raw(Box::new(sweep));
            NpgapStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("panic while running sweep");
            NpgapStatus::Internal
        }
    }
}

/// # Safety
/// `sweep` must be null or a pointer from [`npgap_sweep_run`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn npgap_sweep_free(sweep: *mut NpgapSweep) {
    if !sweep.is_null() {
        drop(Box::from_raw(sweep));
    }
}

/// # Safety
/// `sweep` must be null or a pointer from [`npgap_sweep_run`].
#[no_mangle]
pub unsafe extern "C" fn npgap_sweep_row_count(sweep: *const NpgapSweep) -> usize {
    if sweep.is_null() {
        return 0;
    }
    (*sweep).rows.len()
}

/// # Safety
/// `sweep` must be null or a pointer from [`npgap_sweep_run`].
#[no_mangle]
pub unsafe extern "C" fn npgap_sweep_failure_count(sweep: *const NpgapSweep) -> usize {
    if sweep.is_null() {
        return 0;
    }
    (*sweep).failures
}

/// Fetches one named column value from a row; column names match the CSV
/// header (`eps`, `c_eps`, `max_gap_grad_u`, ...).
///
/// # Safety
/// `sweep` must come from [`npgap_sweep_run`]; `column` must be
/// NUL-terminated; `out` must be a valid out-pointer.
#[no_mangle]
pub unsafe extern "C" fn npgap_sweep_value(
    sweep: *const NpgapSweep,
    row: usize,
    column: *const c_char,
    out: *mut f64,
) -> NpgapStatus {
    if sweep.is_null() || column.is_null() || out.is_null() {
        set_error("null pointer argument");
        return NpgapStatus::InvalidArgument;
    }
    let name = match CStr::from_ptr(column).to_str() {
        Ok(s) => s,
        Err(_) => {
            set_error("column name is not valid UTF-8");
            return NpgapStatus::InvalidArgument;
        }
    };
    let rows = &(*sweep).rows;
    let Some(r) = rows.get(row) else {
        set_error("row index out of range");
        return NpgapStatus::InvalidArgument;
    };
    match r.column(name) {
        Some(v) => {
            *out = v;
            NpgapStatus::Ok
        }
        None => {
            set_error("unknown column name");
            NpgapStatus::InvalidArgument
        }
    }
}

/// Renders the sweep as CSV; free the returned string with
/// [`npgap_string_free`].
///
/// # Safety
/// `sweep` must come from [`npgap_sweep_run`] (or be null).
#[no_mangle]
pub unsafe extern "C" fn npgap_sweep_csv(sweep: *const NpgapSweep) -> *mut c_char {
    if sweep.is_null() {
        return std::ptr::null_mut();
    }
    let csv = npgap::harness::emit::rows_to_csv(&(*sweep).rows);
    CString::new(csv).map(CString::into_raw).unwrap_or(std::ptr::null_mut())
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn npgap_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
