use std::ffi::CStr;
use std::ptr;

use deformed_bec_ffi::*;

fn new_model(delta: f64, g: f64, gamma: f64, n: f64) -> *mut DbecModel {
    let mut model = ptr::null_mut();
    assert_eq!(unsafe { dbec_model_new(delta, g, gamma, n, &mut model) }, DbecStatus::Ok);
    assert!(!model.is_null());
    model
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(dbec_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn steady_state_and_spectrum_round_trip() {
    let model = new_model(0.0, 2.5, 1.0, 100.0);
    let mut st = DbecSteadyState::default();
    assert_eq!(unsafe { dbec_model_steady_state(model, &mut st) }, DbecStatus::Ok);
    assert!(st.stable);
    assert!((st.beta.im + 2.426406871192851).abs() < 1e-12);
    assert!(st.beta.re.abs() < 1e-14);
    assert_eq!(st.beta_inf, DbecComplex { re: 0.0, im: -2.5 });
    assert!(st.scaled_residual <= 1e-12);

    let mut dev = 0.0;
    assert_eq!(unsafe { dbec_model_deviation(model, &mut dev) }, DbecStatus::Ok);
    assert!((dev - 0.07359312880714854).abs() < 1e-12);

    let omega = [0.0, 5.0, -5.0];
    let mut out = [0.0; 3];
    let status = unsafe { dbec_model_spectrum(model, DbecVariant::Paper, omega.as_ptr(), out.as_mut_ptr(), 3) };
    assert_eq!(status, DbecStatus::Ok);
    assert!((out[0] / 3.706886386322228e-5 - 1.0).abs() < 1e-12);
    assert!((out[1] / 2.3633079574339217e-5 - 1.0).abs() < 1e-12);
    assert_eq!(out[1], out[2]);

    let mut phys = [0.0; 3];
    unsafe { dbec_model_spectrum(model, DbecVariant::Physical, omega.as_ptr(), phys.as_mut_ptr(), 3) };
    assert!((phys[0] / out[0] - 20.0).abs() < 1e-12);
    unsafe { dbec_model_free(model) };
}

#[test]
fn eta_override_recovers_linear_root() {
    let model = new_model(2.0, 1.0, 1.0, 4.0);
    assert_eq!(unsafe { dbec_model_set_eta(model, 0.0) }, DbecStatus::Ok);
    let mut st = DbecSteadyState::default();
    unsafe { dbec_model_steady_state(model, &mut st) };
    assert!((st.beta.re + 0.5).abs() < 1e-14 && (st.beta.im + 0.5).abs() < 1e-14);
    assert_eq!(unsafe { dbec_model_set_eta(model, 0.9) }, DbecStatus::InvalidParams);
    unsafe { dbec_model_free(model) };
}

#[test]
fn errors_map_to_status_codes() {
    let mut model = ptr::null_mut();
    assert_eq!(unsafe { dbec_model_new(0.0, 1.0, 1.0, -5.0, &mut model) }, DbecStatus::InvalidParams);
    assert!(model.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(unsafe { dbec_model_new(0.0, 1.0, 1.0, 5.0, ptr::null_mut()) }, DbecStatus::NullPointer);
    assert!(last_error().contains("out"));

    let mut st = DbecSteadyState::default();
    assert_eq!(unsafe { dbec_model_steady_state(ptr::null_mut(), &mut st) }, DbecStatus::NullPointer);

    let unstable = new_model(0.0, 40.0, 1.0, 4.0);
    let mut v = 0.0;
    let status = unsafe { dbec_model_spectrum(unstable, DbecVariant::Paper, &0.0, &mut v, 1) };
    assert!(matches!(status, DbecStatus::Unstable | DbecStatus::NoConvergence), "{status:?}");
    assert_eq!(unsafe { dbec_model_spectrum(unstable, DbecVariant::Paper, ptr::null(), ptr::null_mut(), 0) }, DbecStatus::Ok);
    unsafe { dbec_model_free(unstable) };
    unsafe { dbec_model_free(ptr::null_mut()) };
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(dbec_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/deformed_bec.h")).unwrap();
    for name in [
        "DEFORMED_BEC_H",
        "typedef struct DbecModel DbecModel;",
        "DBEC_STATUS_UNSTABLE",
        "DBEC_VARIANT_PHYSICAL",
        "dbec_model_new",
        "dbec_model_free",
        "dbec_model_set_eta",
        "dbec_model_steady_state",
        "dbec_model_deviation",
        "dbec_model_spectrum",
        "dbec_last_error_message",
        "dbec_version",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}
