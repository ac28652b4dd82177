//! C ABI for the `effent` library.
//!
//! All functions return an [`EffentStatus`] code and write results through out
//! pointers. Handles are opaque; free them with the matching `_free` function.
//! On failure, a human-readable message is available from
//! [`effent_last_error_message`] until the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr, CString};
use std::ptr;

use effent::channels::KrausChannel;
use effent::cli::{parse_channel_spec, parse_dist_spec};
use effent::entanglement::{concurrence_wootters, RoofOpts};
use effent::qcore::DensityMatrix;
use effent::{bec, effective, io, Error};

/// Status codes returned by every FFI entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffentStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Input failed validation (bad JSON, non-CPTP channel, invalid state...).
    InvalidInput = 2,
    /// A numerical procedure failed to reach its guaranteed accuracy.
    Numerical = 3,
}

/// Opaque handle wrapping a quantum channel in Kraus form.
pub struct EffentChannel(KrausChannel);

/// Opaque handle wrapping a (possibly multipartite) density matrix.
pub struct EffentState(DensityMatrix);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_of(e: &Error) -> EffentStatus {
    match e.exit_code() {
        3 => EffentStatus::Numerical,
        _ => EffentStatus::InvalidInput,
    }
}

fn fail(e: Error) -> EffentStatus {
    let status = status_of(&e);
    set_error(&e.to_string());
    status
}

fn null_arg(name: &str) -> EffentStatus {
    set_error(&format!("argument `{name}` must not be null"));
    EffentStatus::NullPointer
}

/// # Safety
/// `ptr` must be a valid NUL-terminated C string.
unsafe fn read_str<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, EffentStatus> {
    if ptr.is_null() {
        return Err(null_arg(name));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(&format!("argument `{name}` is not valid UTF-8"));
        EffentStatus::InvalidInput
    })
}

/// Returns the error message of the most recent failing call on this thread,
/// or null if the most recent call succeeded. The pointer stays valid until
/// the next FFI call on the same thread.
#[no_mangle]
pub extern "C" fn effent_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null(), |c| c.as_ptr())
    })
}

/// Parses a channel from a spec string (`identity:d`, `amplitude-damping:g`,
/// `phase-damping:l`, `depolarizing:p`, `ssr`, `bec:<dist>,<theta>`, or a
/// path to a channel JSON file) and writes a new handle to `out`.
///
/// # Safety
/// `spec` must be a valid NUL-terminated C string; `out` must be a valid
/// pointer to writable memory.
#[no_mangle]
pub unsafe extern "C" fn effent_channel_parse(
    spec: *const c_char,
    tol: c_double,
    out: *mut *mut EffentChannel,
) -> EffentStatus {
    clear_error();
    if out.is_null() {
        return null_arg("out");
    }
    let spec = match read_str(spec, "spec") {
        Ok(s) => s,
        Err(status) => return status,
    };
    match parse_channel_spec(spec, tol) {
        Ok(ch) => {
            *out = Box::into_raw(Box::new(EffentChannel(ch)));
            EffentStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Parses a channel from its JSON representation
/// (`{"d_in", "d_out", "kraus": [...], "cptp"}`).
///
/// # Safety
/// `json` must be a valid NUL-terminated C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn effent_channel_from_json(
    json: *const c_char,
    tol: c_double,
    out: *mut *mut EffentChannel,
) -> EffentStatus {
    clear_error();
    if out.is_null() {
        return null_arg("out");
    }
    let json = match read_str(json, "json") {
        Ok(s) => s,
        Err(status) => return status,
    };
    let parsed: Result<io::ChannelJson, _> = serde_json::from_str(json).map_err(Error::from);
    match parsed.and_then(|c| c.to_channel(tol)) {
        Ok(ch) => {
            *out = Box::into_raw(Box::new(EffentChannel(ch)));
            EffentStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Frees a channel handle. Passing null is a no-op.
///
/// # Safety
/// `handle` must be null or a pointer previously returned by a channel
/// constructor, and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn effent_channel_free(handle: *mut EffentChannel) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Parses a density matrix from its JSON representation
/// (`{"rows", "cols", "data": [[re, im], ...], "dims": [...]}`).
///
/// # Safety
/// `json` must be a valid NUL-terminated C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn effent_state_from_json(
    json: *const c_char,
    tol: c_double,
    out: *mut *mut EffentState,
) -> EffentStatus {
    clear_error();
    if out.is_null() {
        return null_arg("out");
    }
    let json = match read_str(json, "json") {
        Ok(s) => s,
        Err(status) => return status,
    };
    let parsed: Result<io::DensityJson, _> = serde_json::from_str(json).map_err(Error::from);
    match parsed.and_then(|d| d.to_density(tol)) {
        Ok(rho) => {
            *out = Box::into_raw(Box::new(EffentState(rho)));
            EffentStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Frees a state handle. Passing null is a no-op.
///
/// # Safety
/// `handle` must be null or a pointer previously returned by a state
/// constructor, and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn effent_state_free(handle: *mut EffentState) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Computes the quality factor Q of a channel acting on dimension `d` and
/// writes it to `out`.
///
/// # Safety
/// `channel` must be a live channel handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn effent_quality_factor(
    channel: *const EffentChannel,
    d: usize,
    seed: u64,
    out: *mut c_double,
) -> EffentStatus {
    clear_error();
    if channel.is_null() {
        return null_arg("channel");
    }
    if out.is_null() {
        return null_arg("out");
    }
    let opts = RoofOpts { seed, ..RoofOpts::default() };
    match effective::quality_factor_opts(&(*channel).0, d, &opts) {
        Ok(q) => {
            *out = q;
            EffentStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Computes the Wootters concurrence of a two-qubit state.
///
/// # Safety
/// `state` must be a live state handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn effent_concurrence(
    state: *const EffentState,
    out: *mut c_double,
) -> EffentStatus {
    clear_error();
    if state.is_null() {
        return null_arg("state");
    }
    if out.is_null() {
        return null_arg("out");
    }
    match concurrence_wootters(&(*state).0) {
        Ok(c) => {
            *out = c;
            EffentStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Computes the effective G-concurrence of a bipartite state with equal local
/// dimensions under channels on each share. Writes the value to `out` and
/// whether it is exact (1) or an upper bound (0) to `out_exact`.
///
/// # Safety
/// `state`, `channel_a` and `channel_b` must be live handles; `out` and
/// `out_exact` must be writable.
#[no_mangle]
pub unsafe extern "C" fn effent_effective_g_concurrence(
    state: *const EffentState,
    channel_a: *const EffentChannel,
    channel_b: *const EffentChannel,
    seed: u64,
    out: *mut c_double,
    out_exact: *mut c_int,
) -> EffentStatus {
    clear_error();
    if state.is_null() {
        return null_arg("state");
    }
    if channel_a.is_null() {
        return null_arg("channel_a");
    }
    if channel_b.is_null() {
        return null_arg("channel_b");
    }
    if out.is_null() || out_exact.is_null() {
        return null_arg("out");
    }
    let rho = &(*state).0;
    if rho.dims().len() != 2 || rho.dims()[0] != rho.dims()[1] {
        set_error(&format!(
            "state must be bipartite with equal local dimensions, got {:?}",
            rho.dims()
        ));
        return EffentStatus::InvalidInput;
    }
    let opts = RoofOpts { seed, ..RoofOpts::default() };
    match effective::effective_g_concurrence(
        rho,
        &(*channel_a).0,
        &(*channel_b).0,
        rho.dims()[0],
        &opts,
    ) {
        Ok(v) => {
            *out = v.value;
            *out_exact = matches!(v.kind, effective::BoundKind::Exact) as c_int;
            EffentStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Computes the complex dephasing factor g of a phase distribution given as a
/// spec string (`uniform`, `delta:p`, `wrapped-normal:m,s`, `double-rect:w,d`,
/// `delta-mixture:p1,w1;p2,w2;...`). Writes real and imaginary parts.
///
/// # Safety
/// `dist` must be a valid NUL-terminated C string; `out_re` and `out_im` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn effent_bec_g_factor(
    dist: *const c_char,
    out_re: *mut c_double,
    out_im: *mut c_double,
) -> EffentStatus {
    clear_error();
    if out_re.is_null() || out_im.is_null() {
        return null_arg("out");
    }
    let spec = match read_str(dist, "dist") {
        Ok(s) => s,
        Err(status) => return status,
    };
    match parse_dist_spec(spec).and_then(|d| bec::g_factor(&d)) {
        Ok(g) => {
            *out_re = g.re;
            *out_im = g.im;
            EffentStatus::Ok
        }
        Err(e) => fail(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    fn cs(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    #[test]
    fn quality_roundtrip() {
        unsafe {
            let mut ch = ptr::null_mut();
            let spec = cs("amplitude-damping:0.36");
            assert_eq!(
                effent_channel_parse(spec.as_ptr(), 1e-9, &mut ch),
                EffentStatus::Ok
            );
            let mut q = 0.0;
            assert_eq!(effent_quality_factor(ch, 2, 0, &mut q), EffentStatus::Ok);
            assert!((q - 0.8).abs() < 1e-9);
            effent_channel_free(ch);
        }
    }

    #[test]
    fn errors_set_message() {
        unsafe {
            let mut ch = ptr::null_mut();
            let spec = cs("amplitude-damping:2.0");
            assert_eq!(
                effent_channel_parse(spec.as_ptr(), 1e-9, &mut ch),
                EffentStatus::InvalidInput
            );
            let msg = effent_last_error_message();
            assert!(!msg.is_null());
            assert!(!CStr::from_ptr(msg).to_str().unwrap().is_empty());
            // null arguments are reported as such
            assert_eq!(
                effent_channel_parse(ptr::null(), 1e-9, &mut ch),
                EffentStatus::NullPointer
            );
        }
    }

    #[test]
    fn g_factor_wrapped_normal() {
        unsafe {
            let spec = cs("wrapped-normal:0,1.0");
            let (mut re, mut im) = (0.0, 0.0);
            assert_eq!(
                effent_bec_g_factor(spec.as_ptr(), &mut re, &mut im),
                EffentStatus::Ok
            );
            let g = num_complex::Complex64::new(re, im);
            assert!((g.norm() - (-0.5f64).exp()).abs() < 1e-12);
        }
    }
}
