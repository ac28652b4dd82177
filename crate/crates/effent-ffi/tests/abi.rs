//! Exercises the C ABI through the extern "C" surface, including JSON
//! ingestion and the exact/upper-bound flag.

use std::ffi::CString;
use std::os::raw::c_int;
use std::ptr;

use effent_ffi::*;

fn bell_json() -> CString {
    let bell = effent::qcore::max_entangled(2).unwrap().density();
    let json = serde_json::to_string(&effent::io::DensityJson::from_density(&bell)).unwrap();
    CString::new(json).unwrap()
}

#[test]
fn effective_g_concurrence_through_abi() {
    unsafe {
        let mut state = ptr::null_mut();
        let json = bell_json();
        assert_eq!(
            effent_state_from_json(json.as_ptr(), 1e-9, &mut state),
            EffentStatus::Ok
        );

        let mut ch_a = ptr::null_mut();
        let mut ch_b = ptr::null_mut();
        let id = CString::new("identity").unwrap();
        let ad = CString::new("amplitude-damping:0.36").unwrap();
        assert_eq!(
            effent_channel_parse(id.as_ptr(), 1e-9, &mut ch_a),
            EffentStatus::Ok
        );
        assert_eq!(
            effent_channel_parse(ad.as_ptr(), 1e-9, &mut ch_b),
            EffentStatus::Ok
        );

        let mut value = 0.0;
        let mut exact: c_int = -1;
        assert_eq!(
            effent_effective_g_concurrence(state, ch_a, ch_b, 0, &mut value, &mut exact),
            EffentStatus::Ok
        );
        assert_eq!(exact, 1);
        assert!((value - 0.8).abs() < 1e-9);

        let mut conc = 0.0;
        assert_eq!(effent_concurrence(state, &mut conc), EffentStatus::Ok);
        assert!((conc - 1.0).abs() < 1e-9);

        effent_channel_free(ch_a);
        effent_channel_free(ch_b);
        effent_state_free(state);
    }
}

#[test]
fn channel_json_roundtrip_through_abi() {
    unsafe {
        let ch = effent::channels::phase_damping(0.25).unwrap();
        let json = serde_json::to_string(&effent::io::ChannelJson::from_channel(&ch)).unwrap();
        let cjson = CString::new(json).unwrap();
        let mut handle = ptr::null_mut();
        assert_eq!(
            effent_channel_from_json(cjson.as_ptr(), 1e-9, &mut handle),
            EffentStatus::Ok
        );
        let mut q = 0.0;
        assert_eq!(effent_quality_factor(handle, 2, 0, &mut q), EffentStatus::Ok);
        assert!((q - (0.75f64).sqrt()).abs() < 1e-9);
        effent_channel_free(handle);

        // malformed JSON is a clean InvalidInput, not a crash
        let bad = CString::new("{\"d_in\": 2}").unwrap();
        let mut handle = ptr::null_mut();
        assert_eq!(
            effent_channel_from_json(bad.as_ptr(), 1e-9, &mut handle),
            EffentStatus::InvalidInput
        );
        assert!(!effent_last_error_message().is_null());
    }
}

#[test]
fn header_is_generated() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/effent.h");
    let text = std::fs::read_to_string(header).expect("cbindgen header exists");
    for symbol in [
        "effent_channel_parse",
        "effent_state_from_json",
        "effent_quality_factor",
        "effent_effective_g_concurrence",
        "effent_bec_g_factor",
        "effent_last_error_message",
        "EffentStatus",
    ] {
        assert!(text.contains(symbol), "header missing {symbol}");
    }
}
