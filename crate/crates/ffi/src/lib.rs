//! C ABI over `sprt-lattice`.
//!
//! Policies and profiles are opaque heap handles released with their `_free`
//! function. Every fallible call returns an [`SprtStatus`]; on failure
//! [`sprt_last_error`] describes the problem. Rationals cross the boundary as
//! NUL-terminated `"num/den"` strings, and strings returned by the library must
//! be released with [`sprt_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sprt_lattice::beta_map::{beta_lower, beta_upper, choose_c, Decision};
use sprt_lattice::evaluator::profile_exact;
use sprt_lattice::exact::{fmt_rational, parse_rational, to_f64};
use sprt_lattice::transform::linearize;
use sprt_lattice::{bayes_risk, Color, Error, HypothesisParams, Policy, Profile, Rational};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SprtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidParameter = 3,
    Parse = 4,
    SeamViolation = 5,
    Precondition = 6,
    Postcondition = 7,
    BudgetExceeded = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SprtColor {
    White = 0,
    Blue = 1,
    Red = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SprtProfileField {
    DeltaPlus = 0,
    DeltaMinus = 1,
    HPlus = 2,
    HMinus = 3,
}

/// Opaque policy handle.
pub struct SprtPolicy(Policy);

/// Opaque profile handle.
pub struct SprtProfile(Profile);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn status_of(err: &Error) -> SprtStatus {
    match err {
        Error::InvalidParameter(_) => SprtStatus::InvalidParameter,
        Error::Parse { .. } => SprtStatus::Parse,
        Error::SeamViolation { .. } => SprtStatus::SeamViolation,
        Error::Precondition { .. } => SprtStatus::Precondition,
        Error::Postcondition { .. } => SprtStatus::Postcondition,
        Error::BudgetExceeded { .. } => SprtStatus::BudgetExceeded,
    }
}

struct Failure(SprtStatus, String);

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure(status_of(&err), err.to_string())
    }
}

/// Runs `body`, recording failures and turning panics into `Panic`.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> SprtStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SprtStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SprtStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(Failure(SprtStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Failure(SprtStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn read_rational(ptr: *const c_char, what: &str) -> Result<Rational, Failure> {
    Ok(parse_rational(read_str(ptr, what)?)?)
}

unsafe fn read_params(epsilon: *const c_char) -> Result<HypothesisParams, Failure> {
    Ok(HypothesisParams::new(read_rational(epsilon, "epsilon")?)?)
}

unsafe fn deref<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref()
        .ok_or_else(|| Failure(SprtStatus::NullPointer, format!("{what} is null")))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(SprtStatus::NullPointer, format!("{what} is null")));
    }
    out.write(value);
    Ok(())
}

fn new_string(s: String) -> *mut c_char {
    CString::new(s).expect("library strings contain no NUL").into_raw()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn sprt_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sprt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses the policy text format.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sprt_policy_parse(text: *const c_char, out: *mut *mut SprtPolicy) -> SprtStatus {
    guard(|| {
        let policy = Policy::parse(read_str(text, "text")?)?;
        write_out(out, Box::into_raw(Box::new(SprtPolicy(policy))), "out")
    })
}

/// The linear policy `P_c` (stop once `|heads - tails| = c`).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sprt_policy_linear(c: u32, out: *mut *mut SprtPolicy) -> SprtStatus {
    guard(|| {
        let policy = Policy::linear(c)?;
        write_out(out, Box::into_raw(Box::new(SprtPolicy(policy))), "out")
    })
}

/// Releases a policy. Null is ignored.
///
/// # Safety
/// `policy` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sprt_policy_free(policy: *mut SprtPolicy) {
    if !policy.is_null() {
        drop(Box::from_raw(policy));
    }
}

/// # Safety
/// `policy` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sprt_policy_color_at(
    policy: *const SprtPolicy,
    h: usize,
    t: usize,
    out: *mut SprtColor,
) -> SprtStatus {
    guard(|| {
        let color = match deref(policy, "policy")?.0.color_at(h, t) {
            Color::White => SprtColor::White,
            Color::Blue => SprtColor::Blue,
            Color::Red => SprtColor::Red,
        };
        write_out(out, color, "out")
    })
}

/// Serializes a policy to the text format. Free the result with
/// [`sprt_string_free`].
///
/// # Safety
/// `policy` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sprt_policy_to_text(policy: *const SprtPolicy, out: *mut *mut c_char) -> SprtStatus {
    guard(|| {
        let text = deref(policy, "policy")?.0.to_text();
        write_out(out, new_string(text), "out")
    })
}

/// Exact profile of `policy` for bias gap `epsilon`.
///
/// # Safety
/// `policy` must be a live handle, `epsilon` a NUL-terminated string and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn sprt_profile_exact(
    policy: *const SprtPolicy,
    epsilon: *const c_char,
    out: *mut *mut SprtProfile,
) -> SprtStatus {
    guard(|| {
        let policy = deref(policy, "policy")?;
        let params = read_params(epsilon)?;
        let profile = profile_exact(&policy.0, &params);
        write_out(out, Box::into_raw(Box::new(SprtProfile(profile))), "out")
    })
}

/// Releases a profile. Null is ignored.
///
/// # Safety
/// `profile` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sprt_profile_free(profile: *mut SprtProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

fn field(profile: &Profile, which: SprtProfileField) -> &Rational {
    match which {
        SprtProfileField::DeltaPlus => &profile.delta_plus,
        SprtProfileField::DeltaMinus => &profile.delta_minus,
        SprtProfileField::HPlus => &profile.h_plus,
        SprtProfileField::HMinus => &profile.h_minus,
    }
}

/// One profile component as an exact `"num/den"` string.
///
/// # Safety
/// `profile` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sprt_profile_get(
    profile: *const SprtProfile,
    which: SprtProfileField,
    out: *mut *mut c_char,
) -> SprtStatus {
    guard(|| {
        let value = fmt_rational(field(&deref(profile, "profile")?.0, which));
        write_out(out, new_string(value), "out")
    })
}

/// One profile component rounded to the nearest double.
///
/// # Safety
/// `profile` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sprt_profile_get_f64(
    profile: *const SprtProfile,
    which: SprtProfileField,
    out: *mut f64,
) -> SprtStatus {
    guard(|| {
        let value = to_f64(field(&deref(profile, "profile")?.0, which));
        write_out(out, value, "out")
    })
}

/// `(delta+ + delta-) + beta (H+ + H-)` as an exact string.
///
/// # Safety
/// `profile` must be a live handle, `beta` a NUL-terminated string and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn sprt_bayes_risk(
    profile: *const SprtProfile,
    beta: *const c_char,
    out: *mut *mut c_char,
) -> SprtStatus {
    guard(|| {
        let profile = deref(profile, "profile")?;
        let beta = read_rational(beta, "beta")?;
        let risk = bayes_risk(&profile.0, &beta)?;
        write_out(out, new_string(fmt_rational(&risk)), "out")
    })
}

/// Bounds `l_c` and `u_c` of the tradeoffs for which `P_c` is optimal.
///
/// # Safety
/// `epsilon` must be a NUL-terminated string; both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn sprt_beta_interval(
    epsilon: *const c_char,
    c: u32,
    lower_out: *mut *mut c_char,
    upper_out: *mut *mut c_char,
) -> SprtStatus {
    guard(|| {
        let params = read_params(epsilon)?;
        let lower = beta_lower(c, &params)?;
        let upper = beta_upper(c, &params)?;
        if lower_out.is_null() || upper_out.is_null() {
            return Err(Failure(SprtStatus::NullPointer, "output is null".into()));
        }
        write_out(lower_out, new_string(fmt_rational(&lower)), "lower_out")?;
        write_out(upper_out, new_string(fmt_rational(&upper)), "upper_out")
    })
}

/// Optimal threshold for `beta`; writes 0 when declaring without tossing is
/// optimal.
///
/// # Safety
/// `epsilon` and `beta` must be NUL-terminated strings; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sprt_choose_c(epsilon: *const c_char, beta: *const c_char, out: *mut u32) -> SprtStatus {
    guard(|| {
        let params = read_params(epsilon)?;
        let beta = read_rational(beta, "beta")?;
        let c = match choose_c(&beta, &params)? {
            Decision::Linear(c) => c,
            Decision::DeclareImmediately => 0,
        };
        write_out(out, c, "out")
    })
}

/// Runs the audited transformation to the optimal linear policy and returns
/// it together with its threshold.
///
/// # Safety
/// `policy` must be a live handle, the rationals NUL-terminated strings and
/// both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn sprt_linearize(
    policy: *const SprtPolicy,
    epsilon: *const c_char,
    beta: *const c_char,
    gamma: *const c_char,
    out: *mut *mut SprtPolicy,
    threshold_out: *mut u32,
) -> SprtStatus {
    guard(|| {
        let policy = deref(policy, "policy")?;
        let params = read_params(epsilon)?;
        let beta = read_rational(beta, "beta")?;
        let gamma = read_rational(gamma, "gamma")?;
        if out.is_null() || threshold_out.is_null() {
            return Err(Failure(SprtStatus::NullPointer, "output is null".into()));
        }
        let result = linearize(&policy.0, &beta, &params, &gamma)?;
        write_out(threshold_out, result.threshold, "threshold_out")?;
        let final_policy = result.final_policy().clone();
        write_out(out, Box::into_raw(Box::new(SprtPolicy(final_policy))), "out")
    })
}
