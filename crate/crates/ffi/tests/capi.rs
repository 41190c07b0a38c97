use std::ffi::{c_char, CStr, CString};
use std::ptr;

use rfmass_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    let len = unsafe { rfm_last_error(buf.as_mut_ptr(), buf.len()) };
    if len == 0 {
        return String::new();
    }
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn metric(spec: &str, nodes: usize) -> *mut RfmMetric {
    let spec = CString::new(spec).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { rfm_metric_new(spec.as_ptr(), nodes, 0.0, 0.0, 0.0, &mut out) };
    assert_eq!(status, RfmStatus::Ok, "{}", last_error());
    assert!(!out.is_null());
    out
}

#[test]
fn schwarzschild_mass_through_the_c_interface() {
    let m = metric(r#"{"kind":"schwarzschild_slice","n":3,"amplitude":1.0}"#, 1024);
    let (mut mass, mut unc) = (f64::NAN, f64::NAN);
    assert_eq!(unsafe { rfm_metric_adm_mass(m, &mut mass, &mut unc) }, RfmStatus::Ok);
    assert!((mass - 1.0).abs() < 1e-4, "mass {mass}");
    assert!(unc < 1e-4);
    let mut hawking = f64::NAN;
    assert_eq!(unsafe { rfm_metric_hawking_mass(m, 100.0, &mut hawking) }, RfmStatus::Ok);
    assert!((hawking - 1.0).abs() < 1e-6, "hawking {hawking}");
    unsafe { rfm_metric_free(m) };
}

#[test]
fn samples_are_copied_and_short_buffers_rejected() {
    let m = metric(r#"{"kind":"flat","n":3}"#, 256);
    let n = unsafe { rfm_metric_nodes(m) };
    assert_eq!(n, 256);
    let (mut r, mut a, mut b) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let status = unsafe { rfm_metric_samples(m, r.as_mut_ptr(), a.as_mut_ptr(), b.as_mut_ptr(), n) };
    assert_eq!(status, RfmStatus::Ok);
    assert_eq!(r[0], 1.0);
    assert!((r[n - 1] - 1e4).abs() < 1e-8);
    assert!(a.iter().all(|&x| x == 1.0));
    assert!(r.iter().zip(&b).all(|(r, b)| (r - b).abs() <= 1e-12 * r));
    let status = unsafe { rfm_metric_samples(m, r.as_mut_ptr(), ptr::null_mut(), ptr::null_mut(), n - 1) };
    assert_eq!(status, RfmStatus::BufferTooSmall);
    assert!(last_error().contains("need 256"));
    unsafe { rfm_metric_free(m) };
}

#[test]
fn flat_flow_is_stationary() {
    let m = metric(r#"{"kind":"flat","n":3}"#, 256);
    let mut flow = ptr::null_mut();
    assert_eq!(unsafe { rfm_flow_new(m, 1000.0, &mut flow) }, RfmStatus::Ok);
    assert_eq!(unsafe { rfm_flow_evolve(flow, 0.1, 0.5) }, RfmStatus::Ok);
    assert!((unsafe { rfm_flow_time(flow) } - 0.1).abs() < 1e-12);
    assert!(unsafe { rfm_flow_steps(flow) } > 0);
    let mut now = ptr::null_mut();
    assert_eq!(unsafe { rfm_flow_metric(flow, &mut now) }, RfmStatus::Ok);
    let mut mass = f64::NAN;
    assert_eq!(unsafe { rfm_metric_adm_mass(now, &mut mass, ptr::null_mut()) }, RfmStatus::Ok);
    assert_eq!(mass, 0.0);
    unsafe {
        rfm_metric_free(now);
        rfm_flow_free(flow);
        rfm_metric_free(m);
    }
}

#[test]
fn blow_up_is_reported_and_keeps_the_last_state() {
    let m = metric(r#"{"kind":"conformal_bump","n":3,"amplitude":0.5}"#, 256);
    let mut flow = ptr::null_mut();
    assert_eq!(unsafe { rfm_flow_new(m, 0.9999, &mut flow) }, RfmStatus::Ok);
    assert_eq!(unsafe { rfm_flow_evolve(flow, 0.5, 0.5) }, RfmStatus::CurvatureBlowUp);
    assert!(last_error().contains("blow-up"));
    assert!(unsafe { rfm_flow_time(flow) } < 0.5);
    unsafe {
        rfm_flow_free(flow);
        rfm_metric_free(m);
    }
}

#[test]
fn errors_are_reported_with_messages() {
    rfm_clear_error();
    assert_eq!(last_error(), "");
    let mut out = ptr::null_mut();
    let status = unsafe { rfm_metric_new(ptr::null(), 256, 0.0, 0.0, 0.0, &mut out) };
    assert_eq!(status, RfmStatus::NullPointer);
    assert!(out.is_null());
    assert!(last_error().contains("spec_json"));

    let bad = CString::new(r#"{"kind":"wormhole","n":3}"#).unwrap();
    assert_eq!(unsafe { rfm_metric_new(bad.as_ptr(), 256, 0.0, 0.0, 0.0, &mut out) }, RfmStatus::Config);

    let coarse = CString::new(r#"{"kind":"flat","n":3}"#).unwrap();
    assert_eq!(unsafe { rfm_metric_new(coarse.as_ptr(), 4, 0.0, 0.0, 0.0, &mut out) }, RfmStatus::Config);

    let mut mass = 0.0;
    assert_eq!(unsafe { rfm_metric_adm_mass(ptr::null(), &mut mass, ptr::null_mut()) }, RfmStatus::NullPointer);
    assert_eq!(unsafe { rfm_flow_time(ptr::null()) }.is_nan(), true);
    assert_eq!(unsafe { rfm_metric_nodes(ptr::null()) }, 0);
    unsafe {
        rfm_metric_free(ptr::null_mut());
        rfm_flow_free(ptr::null_mut());
        rfm_string_free(ptr::null_mut());
    }
}

#[test]
fn truncated_error_copy_reports_full_length() {
    let mut out = ptr::null_mut();
    unsafe { rfm_metric_new(ptr::null(), 256, 0.0, 0.0, 0.0, &mut out) };
    let full = last_error();
    let mut buf = [0 as c_char; 5];
    let len = unsafe { rfm_last_error(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(len, full.len());
    assert_eq!(unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap(), &full[..4]);
}

#[test]
fn snapshot_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("m.csv").to_str().unwrap()).unwrap();
    let m = metric(r#"{"kind":"conformal_bump","n":3,"amplitude":0.5}"#, 256);
    assert_eq!(unsafe { rfm_metric_write(m, path.as_ptr(), 0.25) }, RfmStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { rfm_metric_read(path.as_ptr(), &mut back) }, RfmStatus::Ok);
    let n = unsafe { rfm_metric_nodes(m) };
    let (mut a0, mut a1) = (vec![0.0; n], vec![0.0; n]);
    unsafe {
        rfm_metric_samples(m, ptr::null_mut(), a0.as_mut_ptr(), ptr::null_mut(), n);
        rfm_metric_samples(back, ptr::null_mut(), a1.as_mut_ptr(), ptr::null_mut(), n);
    }
    assert_eq!(a0, a1);
    let missing = CString::new(dir.path().join("nope.csv").to_str().unwrap()).unwrap();
    let mut none = ptr::null_mut();
    assert_eq!(unsafe { rfm_metric_read(missing.as_ptr(), &mut none) }, RfmStatus::Io);
    unsafe {
        rfm_metric_free(back);
        rfm_metric_free(m);
    }
}

#[test]
fn run_from_toml_returns_a_summary() {
    let toml = CString::new(
        r#"
name = "ffi-flat"
[initial]
kind = "flat"
n = 3
[grid]
nodes = 256
[flow]
t_final = 0.05
record_every = 50
"#,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out_dir = CString::new(dir.path().to_str().unwrap()).unwrap();
    let mut summary = ptr::null_mut();
    let status = unsafe { rfm_run_toml(toml.as_ptr(), out_dir.as_ptr(), &mut summary) };
    assert_eq!(status, RfmStatus::Ok, "{}", last_error());
    assert!(!summary.is_null());
    let json: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(summary) }.to_str().unwrap()).unwrap();
    unsafe { rfm_string_free(summary) };
    assert_eq!(json["status"], "completed");
    assert_eq!(json["mass"]["drift"], 0.0);
    assert!(dir.path().join("series.csv").exists());
    assert!(dir.path().join("summary.json").exists());

    let bad = CString::new("name = 3").unwrap();
    let mut summary = ptr::null_mut();
    assert_eq!(unsafe { rfm_run_toml(bad.as_ptr(), ptr::null(), &mut summary) }, RfmStatus::Config);
    assert!(summary.is_null());
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/rfmass.h");
    let source = include_str!("../src/lib.rs");
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    for status in ["RFM_STATUS_OK = 0", "RFM_STATUS_CURVATURE_BLOW_UP = 4", "RFM_STATUS_PANIC = 9"] {
        assert!(header.contains(status));
    }
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(rfm_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
