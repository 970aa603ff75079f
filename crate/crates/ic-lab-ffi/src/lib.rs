//! C ABI over the core library: opaque box handles, status codes, and
//! JSON-string reports. The header `include/ic_lab.h` is generated at
//! build time.
//!
//! Conventions: every function returns an `IcLabStatus`; results come back
//! through out pointers. Strings returned through `char **` are owned by
//! the caller and must be released with `ic_lab_string_free`. On any
//! non-`Ok` status a human-readable message is available from
//! `ic_lab_last_error` until the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ic_lab::infotheory::{bb84_split, es_ratio_probe};
use ic_lab::nsbox::{
    broadcast_pr_box, isotropic_box, no_signaling_check, perfect_sb_box, pr_box, shared_coin_box,
    BoxTable,
};
use ic_lab::rac::{run_additive, RacConfig, RacVariant};
use ic_lab::IcError;

/// Status code of every C-ABI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcLabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidUtf8 = 3,
    InternalError = 4,
}

/// Opaque handle to a conditional probability table.
pub struct IcLabBox {
    table: BoxTable,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let cleaned: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(cleaned).unwrap_or_default());
}

fn status_of(err: &IcError) -> IcLabStatus {
    match err {
        IcError::Io(_) | IcError::Json(_) | IcError::Csv(_) => IcLabStatus::InternalError,
        _ => IcLabStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> IcLabStatus) -> IcLabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            IcLabStatus::InternalError
        }
    }
}

/// Message describing the most recent error on this thread. The pointer is
/// valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn ic_lab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a caller-owned string.
#[no_mangle]
pub extern "C" fn ic_lab_version(out: *mut *mut c_char) -> IcLabStatus {
    write_string(out, env!("CARGO_PKG_VERSION"))
}

fn write_string(out: *mut *mut c_char, s: &str) -> IcLabStatus {
    if out.is_null() {
        set_error("null output pointer");
        return IcLabStatus::NullPointer;
    }
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            IcLabStatus::Ok
        }
        Err(_) => {
            set_error("string contains interior NUL");
            IcLabStatus::InternalError
        }
    }
}

/// Release a string returned by this library.
#[no_mangle]
pub extern "C" fn ic_lab_string_free(s: *mut c_char) {
    if !s.is_null() {
        unsafe { drop(CString::from_raw(s)) };
    }
}

fn write_box(out: *mut *mut IcLabBox, table: Result<BoxTable, IcError>) -> IcLabStatus {
    if out.is_null() {
        set_error("null output pointer");
        return IcLabStatus::NullPointer;
    }
    match table {
        Ok(table) => {
            let handle = Box::new(IcLabBox { table });
            unsafe { *out = Box::into_raw(handle) };
            IcLabStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// The two-party box with perfectly correlated XOR on the input product.
#[no_mangle]
pub extern "C" fn ic_lab_box_pr(out: *mut *mut IcLabBox) -> IcLabStatus {
    guard(|| write_box(out, Ok(pr_box())))
}

/// Two-party box with tunable correlation `e` in [-1, 1].
#[no_mangle]
pub extern "C" fn ic_lab_box_isotropic(e: f64, out: *mut *mut IcLabBox) -> IcLabStatus {
    guard(|| write_box(out, isotropic_box(e)))
}

/// Sender plus `n` receivers sharing the sender's first data bit.
#[no_mangle]
pub extern "C" fn ic_lab_box_shared_coin(n: usize, out: *mut *mut IcLabBox) -> IcLabStatus {
    guard(|| write_box(out, shared_coin_box(n)))
}

/// Signaling probe: `n` receivers each seeing a perfect pairwise box.
#[no_mangle]
pub extern "C" fn ic_lab_box_broadcast_pr(n: usize, out: *mut *mut IcLabBox) -> IcLabStatus {
    guard(|| write_box(out, broadcast_pr_box(n)))
}

/// Two senders and `n` receivers saturating the three-party functional.
#[no_mangle]
pub extern "C" fn ic_lab_box_sb(n: usize, out: *mut *mut IcLabBox) -> IcLabStatus {
    guard(|| write_box(out, perfect_sb_box(n)))
}

/// Parse a box from its JSON form.
#[no_mangle]
pub extern "C" fn ic_lab_box_from_json(
    json: *const c_char,
    out: *mut *mut IcLabBox,
) -> IcLabStatus {
    guard(|| {
        if json.is_null() {
            set_error("null json pointer");
            return IcLabStatus::NullPointer;
        }
        let text = match unsafe { CStr::from_ptr(json) }.to_str() {
            Ok(t) => t,
            Err(_) => {
                set_error("json is not valid UTF-8");
                return IcLabStatus::InvalidUtf8;
            }
        };
        write_box(out, BoxTable::from_json(text))
    })
}

/// Serialize a box to JSON; exact round trip.
#[no_mangle]
pub extern "C" fn ic_lab_box_to_json(
    handle: *const IcLabBox,
    out: *mut *mut c_char,
) -> IcLabStatus {
    guard(|| {
        let Some(b) = (unsafe { handle.as_ref() }) else {
            set_error("null box handle");
            return IcLabStatus::NullPointer;
        };
        write_string(out, &b.table.to_json())
    })
}

/// Release a box handle.
#[no_mangle]
pub extern "C" fn ic_lab_box_free(handle: *mut IcLabBox) {
    if !handle.is_null() {
        unsafe { drop(Box::from_raw(handle)) };
    }
}

/// Worst marginal spread across parties; `passed` is 1 when it is within
/// `tol`.
#[no_mangle]
pub extern "C" fn ic_lab_box_no_signaling(
    handle: *const IcLabBox,
    tol: f64,
    worst_violation: *mut f64,
    passed: *mut i32,
) -> IcLabStatus {
    guard(|| {
        let Some(b) = (unsafe { handle.as_ref() }) else {
            set_error("null box handle");
            return IcLabStatus::NullPointer;
        };
        if worst_violation.is_null() || passed.is_null() {
            set_error("null output pointer");
            return IcLabStatus::NullPointer;
        }
        let report = no_signaling_check(&b.table, tol);
        unsafe {
            *worst_violation = report.worst_violation;
            *passed = i32::from(report.passed);
        }
        IcLabStatus::Ok
    })
}

/// Run the additive decoding protocol for `n` receivers and `k` data bits
/// over the box; the full report comes back as a JSON string.
#[no_mangle]
pub extern "C" fn ic_lab_rac_run_additive(
    handle: *const IcLabBox,
    receivers: usize,
    database_bits: usize,
    out_json: *mut *mut c_char,
) -> IcLabStatus {
    guard(|| {
        let Some(b) = (unsafe { handle.as_ref() }) else {
            set_error("null box handle");
            return IcLabStatus::NullPointer;
        };
        let report = RacConfig::new(receivers, database_bits, RacVariant::Additive)
            .and_then(|config| run_additive(&b.table, &config))
            .and_then(|r| serde_json::to_string(&r).map_err(IcError::from));
        match report {
            Ok(json) => write_string(out_json, &json),
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Split one shared bit of a qubit channel at error rate `qber` into the
/// two receiver quantities.
#[no_mangle]
pub extern "C" fn ic_lab_bb84_split(qber: f64, i1: *mut f64, i2: *mut f64) -> IcLabStatus {
    guard(|| {
        if i1.is_null() || i2.is_null() {
            set_error("null output pointer");
            return IcLabStatus::NullPointer;
        }
        match bb84_split(qber) {
            Ok((a, b)) => {
                unsafe {
                    *i1 = a;
                    *i2 = b;
                }
                IcLabStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Closed-form window of the k-receiver functional.
#[no_mangle]
pub extern "C" fn ic_lab_ic_bounds(k: usize, lower: *mut f64, upper: *mut f64) -> IcLabStatus {
    guard(|| {
        if lower.is_null() || upper.is_null() {
            set_error("null output pointer");
            return IcLabStatus::NullPointer;
        }
        match ic_lab::bell::ic_bounds(k) {
            Ok((lo, up)) => {
                unsafe {
                    *lower = lo;
                    *upper = up;
                }
                IcLabStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Randomized ratio probe of the channel-reduction lemma; reports the
/// maximum of `ratio / xi^2` over all trials.
#[no_mangle]
pub extern "C" fn ic_lab_es_probe(
    trials: u64,
    seed: u64,
    max_ratio_over_xi2: *mut f64,
) -> IcLabStatus {
    guard(|| {
        if max_ratio_over_xi2.is_null() {
            set_error("null output pointer");
            return IcLabStatus::NullPointer;
        }
        let grid: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
        match es_ratio_probe(trials, seed, 2, 2, &grid) {
            Ok(report) => {
                unsafe { *max_ratio_over_xi2 = report.max_ratio_over_xi2 };
                IcLabStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn take_string(p: *mut c_char) -> String {
        assert!(!p.is_null());
        let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string();
        ic_lab_string_free(p);
        s
    }

    #[test]
    fn version_matches_crate() {
        let mut p: *mut c_char = ptr::null_mut();
        assert_eq!(ic_lab_version(&mut p), IcLabStatus::Ok);
        assert_eq!(take_string(p), env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn box_json_round_trip() {
        let mut b: *mut IcLabBox = ptr::null_mut();
        assert_eq!(ic_lab_box_isotropic(0.75, &mut b), IcLabStatus::Ok);
        let mut j: *mut c_char = ptr::null_mut();
        assert_eq!(ic_lab_box_to_json(b, &mut j), IcLabStatus::Ok);
        let json = take_string(j);
        let cjson = CString::new(json.clone()).unwrap();
        let mut b2: *mut IcLabBox = ptr::null_mut();
        assert_eq!(ic_lab_box_from_json(cjson.as_ptr(), &mut b2), IcLabStatus::Ok);
        let mut j2: *mut c_char = ptr::null_mut();
        assert_eq!(ic_lab_box_to_json(b2, &mut j2), IcLabStatus::Ok);
        assert_eq!(take_string(j2), json);
        ic_lab_box_free(b);
        ic_lab_box_free(b2);
    }

    #[test]
    fn invalid_inputs_set_errors() {
        let mut b: *mut IcLabBox = ptr::null_mut();
        assert_eq!(ic_lab_box_isotropic(1.5, &mut b), IcLabStatus::InvalidArgument);
        let msg = unsafe { CStr::from_ptr(ic_lab_last_error()) }.to_str().unwrap();
        assert!(!msg.is_empty());
        assert_eq!(ic_lab_box_pr(ptr::null_mut()), IcLabStatus::NullPointer);
        let mut i1 = 0.0;
        assert_eq!(ic_lab_bb84_split(0.7, &mut i1, ptr::null_mut()), IcLabStatus::NullPointer);
        let mut i2 = 0.0;
        assert_eq!(ic_lab_bb84_split(0.7, &mut i1, &mut i2), IcLabStatus::InvalidArgument);
    }

    #[test]
    fn no_signaling_and_rac_over_ffi() {
        let mut b: *mut IcLabBox = ptr::null_mut();
        assert_eq!(ic_lab_box_pr(&mut b), IcLabStatus::Ok);
        let (mut worst, mut passed) = (1.0, 0);
        assert_eq!(
            ic_lab_box_no_signaling(b, 1e-9, &mut worst, &mut passed),
            IcLabStatus::Ok
        );
        assert_eq!(passed, 1);
        assert!(worst <= 1e-12);
        let mut j: *mut c_char = ptr::null_mut();
        assert_eq!(ic_lab_rac_run_additive(b, 1, 2, &mut j), IcLabStatus::Ok);
        let report: serde_json::Value = serde_json::from_str(&take_string(j)).unwrap();
        let i_total = report["i_total"].as_f64().unwrap();
        assert!((i_total - 2.0).abs() < 1e-12);
        ic_lab_box_free(b);

        let mut sig: *mut IcLabBox = ptr::null_mut();
        assert_eq!(ic_lab_box_broadcast_pr(2, &mut sig), IcLabStatus::Ok);
        assert_eq!(
            ic_lab_box_no_signaling(sig, 1e-9, &mut worst, &mut passed),
            IcLabStatus::Ok
        );
        assert_eq!(passed, 0);
        assert!((worst - 0.5).abs() < 1e-12);
        ic_lab_box_free(sig);
    }

    #[test]
    fn scalar_helpers() {
        let (mut i1, mut i2) = (0.0, 0.0);
        assert_eq!(ic_lab_bb84_split(0.0, &mut i1, &mut i2), IcLabStatus::Ok);
        assert_eq!((i1, i2), (1.0, 0.0));
        let (mut lo, mut up) = (0.0, 0.0);
        assert_eq!(ic_lab_ic_bounds(3, &mut lo, &mut up), IcLabStatus::Ok);
        assert!((lo - 6.0).abs() < 1e-12);
        assert!((up - 4.0 * 3f64.sqrt()).abs() < 1e-12);
        let mut r = 0.0;
        assert_eq!(ic_lab_es_probe(100, 7, &mut r), IcLabStatus::Ok);
        assert!(r <= 1.0 + 1e-9);
    }
}
