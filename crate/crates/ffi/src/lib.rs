//! C ABI for the refined-stark verification library.
//!
//! Conventions:
//! - Every fallible function returns an [`RsStatus`] code; `RS_STATUS_OK`
//!   (zero) means success.
//! - Verification results are returned as heap-allocated, NUL-terminated
//!   UTF-8 JSON strings through `char **` out-parameters; release them with
//!   [`rs_string_free`].
//! - On failure, a human-readable message is available from
//!   [`rs_last_error_message`]; the pointer is valid on the calling thread
//!   until the next call into this library.
//! - Case handles ([`RsCase`]) are opaque; create with [`rs_case_new`] and
//!   release with [`rs_case_free`]. A handle caches the S-unit and character
//!   data for one (D, n) instance so repeated verifications reuse it.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use refined_stark::darmon::{self, DarmonCase};
use refined_stark::error::Error;
use refined_stark::numberfield::QuadField;
use refined_stark::{lfun, stark};
use serde_json::{json, Value};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RsStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// An argument was out of range or otherwise invalid.
    InvalidArgument = 2,
    /// An internal consistency check failed.
    Internal = 3,
    /// Working precision was exhausted.
    Precision = 4,
    /// A verification step could not be completed.
    Verification = 5,
    /// An I/O or serialization error occurred.
    Io = 6,
    /// The library caught a panic; the handle state is still valid.
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> RsStatus {
    match err {
        Error::Dimension(_) | Error::InvalidArgument(_) => RsStatus::InvalidArgument,
        Error::Internal(_) => RsStatus::Internal,
        Error::Precision(_) => RsStatus::Precision,
        Error::Verification(_) => RsStatus::Verification,
        Error::Io(_) | Error::Json(_) => RsStatus::Io,
    }
}

/// Run `f` with panics converted to `RsStatus::Panic` and errors recorded in
/// the thread-local message slot.
fn guard(f: impl FnOnce() -> Result<RsStatus, Error>) -> RsStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(e)) => {
            let s = status_of(&e);
            set_last_error(e.to_string());
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic in library call".into());
            set_last_error(msg);
            RsStatus::Panic
        }
    }
}

fn write_json(out: *mut *mut c_char, value: &Value) -> Result<RsStatus, Error> {
    let s = serde_json::to_string_pretty(value)?;
    let c = CString::new(s)
        .map_err(|_| Error::Internal("JSON output contained a NUL byte".into()))?;
    unsafe { *out = c.into_raw() };
    Ok(RsStatus::Ok)
}

/// Opaque verification-case handle for one (D, n) instance.
pub struct RsCase {
    inner: DarmonCase,
}

/// Message describing the most recent failure on this thread, or NULL if the
/// last call succeeded. The pointer is invalidated by the next library call
/// on the same thread; copy the string if it must outlive that.
#[no_mangle]
pub extern "C" fn rs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| match &*e.borrow() {
        Some(c) => c.as_ptr(),
        None => std::ptr::null(),
    })
}

/// Release a string returned by this library. NULL is ignored.
#[no_mangle]
pub extern "C" fn rs_string_free(s: *mut c_char) {
    if !s.is_null() {
        unsafe { drop(CString::from_raw(s)) };
    }
}

/// Create a case handle for discriminant `d` and modulus `n`. On success the
/// new handle is stored in `*out` and must be released with [`rs_case_free`].
#[no_mangle]
pub extern "C" fn rs_case_new(d: u64, n: u64, out: *mut *mut RsCase) -> RsStatus {
    guard(|| {
        if out.is_null() {
            set_last_error("out pointer is NULL".into());
            return Ok(RsStatus::NullPointer);
        }
        let case = DarmonCase::new(d, n)?;
        unsafe { *out = Box::into_raw(Box::new(RsCase { inner: case })) };
        Ok(RsStatus::Ok)
    })
}

/// Release a case handle. NULL is ignored.
#[no_mangle]
pub extern "C" fn rs_case_free(case: *mut RsCase) {
    if !case.is_null() {
        unsafe { drop(Box::from_raw(case)) };
    }
}

/// The derived comparison modulus m of the case (1 in the degenerate case).
#[no_mangle]
pub extern "C" fn rs_case_modulus(case: *const RsCase, out: *mut u64) -> RsStatus {
    guard(|| {
        if case.is_null() || out.is_null() {
            set_last_error("NULL argument".into());
            return Ok(RsStatus::NullPointer);
        }
        unsafe { *out = (*case).inner.m };
        Ok(RsStatus::Ok)
    })
}

/// Number of split (resp. inert) primes dividing n, written to `nu_plus` and
/// `nu_minus`; either out-pointer may be NULL to skip it.
#[no_mangle]
pub extern "C" fn rs_case_signature(
    case: *const RsCase,
    nu_plus: *mut u64,
    nu_minus: *mut u64,
) -> RsStatus {
    guard(|| {
        if case.is_null() {
            set_last_error("case pointer is NULL".into());
            return Ok(RsStatus::NullPointer);
        }
        let s = unsafe { &(*case).inner.sunits };
        if !nu_plus.is_null() {
            unsafe { *nu_plus = s.nu_plus as u64 };
        }
        if !nu_minus.is_null() {
            unsafe { *nu_minus = s.nu_minus as u64 };
        }
        Ok(RsStatus::Ok)
    })
}

/// Run the headline class comparison for the case. `mutated` nonzero runs
/// the deliberately wrong-class-number control, whose expected verdict is a
/// failure. The JSON verdict record is stored in `*out_json`.
#[no_mangle]
pub extern "C" fn rs_case_verify_headline(
    case: *const RsCase,
    mutated: i32,
    trials: usize,
    seed: u64,
    precision_bits: usize,
    tolerance: f64,
    out_json: *mut *mut c_char,
) -> RsStatus {
    guard(|| {
        if case.is_null() || out_json.is_null() {
            set_last_error("NULL argument".into());
            return Ok(RsStatus::NullPointer);
        }
        let c = unsafe { &(*case).inner };
        let v = if mutated != 0 {
            darmon::verify_mrthm_mutated(c, trials, seed, precision_bits, tolerance)?
        } else {
            darmon::verify_mrthm(c, trials, seed, precision_bits, tolerance)?
        };
        write_json(out_json, &v)
    })
}

/// Full composite verification of one (D, n) case: filtration, auxiliary
/// family certificate, exact norm identity, leading-term identity, descent,
/// and the headline comparison. The JSON report is stored in `*out_json`.
#[no_mangle]
pub extern "C" fn rs_verify_case(
    d: u64,
    n: u64,
    trials: usize,
    seed: u64,
    precision_bits: usize,
    tolerance: f64,
    out_json: *mut *mut c_char,
) -> RsStatus {
    guard(|| {
        if out_json.is_null() {
            set_last_error("out pointer is NULL".into());
            return Ok(RsStatus::NullPointer);
        }
        let v = darmon::verify_darmon_case(d, n, trials, seed, precision_bits, tolerance)?;
        write_json(out_json, &v)
    })
}

/// Numerical rank-1 Stark verification for discriminant `d`, modulus `n`,
/// and the auxiliary prime set `t_set` (length `t_len`).
#[no_mangle]
pub extern "C" fn rs_verify_stark_rank1(
    d: u64,
    n: u64,
    t_set: *const u64,
    t_len: usize,
    precision_bits: usize,
    tolerance: f64,
    out_json: *mut *mut c_char,
) -> RsStatus {
    guard(|| {
        if out_json.is_null() || (t_len > 0 && t_set.is_null()) {
            set_last_error("NULL argument".into());
            return Ok(RsStatus::NullPointer);
        }
        let ts = if t_len == 0 {
            &[]
        } else {
            unsafe { std::slice::from_raw_parts(t_set, t_len) }
        };
        let v = stark::verify_stark_rank1(d, n, ts, precision_bits, tolerance)?;
        write_json(out_json, &v)
    })
}

/// Regulator comparison between the base field and the extension for
/// discriminant `d` and modulus `n`; the JSON record includes both sides and
/// the relative error.
#[no_mangle]
pub extern "C" fn rs_lemma_compute(
    d: u64,
    n: u64,
    precision_bits: usize,
    out_json: *mut *mut c_char,
) -> RsStatus {
    guard(|| {
        if out_json.is_null() {
            set_last_error("out pointer is NULL".into());
            return Ok(RsStatus::NullPointer);
        }
        let field = Arc::new(QuadField::new(d)?);
        let r = lfun::verify_lemma_compute(&field, n, precision_bits)?;
        let v = json!({
            "statement": "regulator_comparison",
            "instance": {"d": r.d, "n": r.n, "nu_plus": r.nu_plus, "nu_minus": r.nu_minus},
            "lhs": r.lhs,
            "rhs": r.rhs,
            "rel_err": r.rel_err,
            "verdict": if r.pass { "pass" } else { "fail" },
        });
        write_json(out_json, &v)
    })
}

/// Exact unramified-tower oracle: quadratic field of fundamental discriminant
/// `disc` (negative for the rank-0 branch, positive prime for rank 1), inert
/// primes `qs`, auxiliary set `t_set`, and `trials` residue trials.
#[no_mangle]
pub extern "C" fn rs_verify_unramified(
    disc: i64,
    qs: *const u64,
    qs_len: usize,
    t_set: *const u64,
    t_len: usize,
    trials: usize,
    out_json: *mut *mut c_char,
) -> RsStatus {
    guard(|| {
        if out_json.is_null()
            || (qs_len > 0 && qs.is_null())
            || (t_len > 0 && t_set.is_null())
        {
            set_last_error("NULL argument".into());
            return Ok(RsStatus::NullPointer);
        }
        let inst = stark::UnramifiedInstance {
            disc,
            qs: if qs_len == 0 {
                Vec::new()
            } else {
                unsafe { std::slice::from_raw_parts(qs, qs_len) }.to_vec()
            },
            t_set: if t_len == 0 {
                Vec::new()
            } else {
                unsafe { std::slice::from_raw_parts(t_set, t_len) }.to_vec()
            },
            trials,
        };
        let v = stark::verify_unramified_case(&inst)?;
        write_json(out_json, &v)
    })
}

/// Find an auxiliary prime family for `level` with primes below `bound`,
/// returned as a JSON array of {"t": prime, "a": coefficient-as-string}.
#[no_mangle]
pub extern "C" fn rs_find_t_family(
    level: u64,
    bound: u64,
    out_json: *mut *mut c_char,
) -> RsStatus {
    guard(|| {
        if out_json.is_null() {
            set_last_error("out pointer is NULL".into());
            return Ok(RsStatus::NullPointer);
        }
        let family = darmon::find_t_family(level, bound)?;
        let v = Value::Array(
            family
                .iter()
                .map(|(t, a)| json!({"t": t, "a": a.to_string()}))
                .collect(),
        );
        write_json(out_json, &v)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn take_string(p: *mut c_char) -> String {
        assert!(!p.is_null());
        let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string();
        rs_string_free(p);
        s
    }

    #[test]
    fn case_lifecycle_and_accessors() {
        let mut case: *mut RsCase = ptr::null_mut();
        assert_eq!(rs_case_new(5, 11, &mut case), RsStatus::Ok);
        assert!(!case.is_null());
        let mut m = 0u64;
        assert_eq!(rs_case_modulus(case, &mut m), RsStatus::Ok);
        assert_eq!(m, 5);
        let (mut np, mut nm) = (99u64, 99u64);
        assert_eq!(rs_case_signature(case, &mut np, &mut nm), RsStatus::Ok);
        assert_eq!((np, nm), (1, 0));
        rs_case_free(case);
    }

    #[test]
    fn invalid_case_reports_error() {
        let mut case: *mut RsCase = ptr::null_mut();
        let st = rs_case_new(4, 11, &mut case);
        assert_eq!(st, RsStatus::InvalidArgument);
        assert!(case.is_null());
        let msg = unsafe { CStr::from_ptr(rs_last_error_message()) }
            .to_str()
            .unwrap();
        assert!(msg.contains("invalid argument"), "unexpected: {msg}");
    }

    #[test]
    fn null_arguments_are_rejected() {
        assert_eq!(rs_case_new(5, 11, ptr::null_mut()), RsStatus::NullPointer);
        let mut out: *mut c_char = ptr::null_mut();
        assert_eq!(
            rs_case_verify_headline(ptr::null(), 0, 8, 1, 128, 1e-8, &mut out),
            RsStatus::NullPointer
        );
        assert_eq!(rs_case_modulus(ptr::null(), ptr::null_mut()), RsStatus::NullPointer);
    }

    #[test]
    fn headline_and_mutated_control() {
        let mut case: *mut RsCase = ptr::null_mut();
        assert_eq!(rs_case_new(5, 11, &mut case), RsStatus::Ok);
        let mut out: *mut c_char = ptr::null_mut();
        assert_eq!(
            rs_case_verify_headline(case, 0, 40, 1, 256, 1e-8, &mut out),
            RsStatus::Ok
        );
        let v: Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(v["verdict"], "pass");

        let mut out2: *mut c_char = ptr::null_mut();
        assert_eq!(
            rs_case_verify_headline(case, 1, 40, 1, 256, 1e-8, &mut out2),
            RsStatus::Ok
        );
        let v2: Value = serde_json::from_str(&take_string(out2)).unwrap();
        assert_eq!(v2["verdict"], "fail");
        rs_case_free(case);
    }

    #[test]
    fn stark_rank1_roundtrip() {
        let mut out: *mut c_char = ptr::null_mut();
        let ts = [7u64];
        assert_eq!(
            rs_verify_stark_rank1(5, 11, ts.as_ptr(), ts.len(), 256, 1e-8, &mut out),
            RsStatus::Ok
        );
        let v: Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(v["verdict"], "pass");
    }

    #[test]
    fn lemma_compute_roundtrip() {
        let mut out: *mut c_char = ptr::null_mut();
        assert_eq!(rs_lemma_compute(5, 11, 256, &mut out), RsStatus::Ok);
        let v: Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(v["verdict"], "pass");
        assert!(v["rel_err"].as_f64().unwrap() < 1e-8);
    }

    #[test]
    fn unramified_roundtrip() {
        let mut out: *mut c_char = ptr::null_mut();
        let qs = [5u64];
        let ts = [3u64];
        assert_eq!(
            rs_verify_unramified(-7, qs.as_ptr(), 1, ts.as_ptr(), 1, 16, &mut out),
            RsStatus::Ok
        );
        let v: Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(v["verdict"].as_str().unwrap(), "pass");
    }

    #[test]
    fn t_family_roundtrip() {
        let mut out: *mut c_char = ptr::null_mut();
        assert_eq!(rs_find_t_family(55, 5_000_000, &mut out), RsStatus::Ok);
        let v: Value = serde_json::from_str(&take_string(out)).unwrap();
        let arr = v.as_array().unwrap();
        assert!(!arr.is_empty());
        assert!(arr[0]["t"].as_u64().unwrap() > 2);
    }
}
