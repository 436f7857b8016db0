use std::ffi::{CStr, CString};
use std::ptr;

use steinclt_ffi::*;

fn last_error() -> String {
    let p = steinclt_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn model(family: &str, d: usize, n: usize) -> *mut SteincltModel {
    let name = CString::new(family).unwrap();
    let mut m = ptr::null_mut();
    let st = unsafe { steinclt_model_new(name.as_ptr(), d, n, f64::NAN, &mut m) };
    assert_eq!(st, SteincltStatus::Ok);
    assert!(!m.is_null());
    m
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(steinclt_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn model_lifecycle_and_bounds() {
    let m = model("rademacher", 1, 100);
    let mut d = 0usize;
    assert_eq!(unsafe { steinclt_model_dim(m, &mut d) }, SteincltStatus::Ok);
    assert_eq!(d, 1);
    let mut b = SteincltBounds::default();
    assert_eq!(unsafe { steinclt_model_bounds(m, &mut b) }, SteincltStatus::Ok);
    assert!((b.m3 - 0.05).abs() < 1e-12);
    assert!((b.m2 - 0.094).abs() < 1e-12);
    assert!((b.m1 - 1.11).abs() < 1e-12);
    assert!(steinclt_last_error_message().is_null());
    unsafe { steinclt_model_free(m) };
    unsafe { steinclt_model_free(ptr::null_mut()) };
}

#[test]
fn unknown_family_reports_error() {
    let name = CString::new("cauchy").unwrap();
    let mut m = ptr::null_mut();
    let st = unsafe { steinclt_model_new(name.as_ptr(), 1, 10, f64::NAN, &mut m) };
    assert_eq!(st, SteincltStatus::UnknownFamily);
    assert!(m.is_null());
    assert!(last_error().contains("rademacher"));
}

#[test]
fn null_pointers_are_rejected() {
    let mut out = 0.0;
    assert_eq!(
        unsafe { steinclt_model_new(ptr::null(), 1, 1, f64::NAN, ptr::null_mut()) },
        SteincltStatus::NullPointer
    );
    assert_eq!(unsafe { steinclt_constant_c(0, ptr::null_mut()) }, SteincltStatus::NullPointer);
    assert_eq!(
        unsafe { steinclt_w1_exact(ptr::null(), ptr::null(), 1, 1, &mut out) },
        SteincltStatus::NullPointer
    );
    let mut b = SteincltBounds::default();
    assert_eq!(unsafe { steinclt_model_bounds(ptr::null(), &mut b) }, SteincltStatus::NullPointer);
}

#[test]
fn w1_exact_line_example() {
    let a = [0.0, 2.0];
    let b = [1.0, 3.0];
    let mut out = f64::NAN;
    assert_eq!(unsafe { steinclt_w1_exact(a.as_ptr(), b.as_ptr(), 2, 1, &mut out) }, SteincltStatus::Ok);
    assert!((out - 1.0).abs() < 1e-15);
    let p = [0.0, 0.0];
    let q = [3.0, 4.0];
    assert_eq!(unsafe { steinclt_w1_exact(p.as_ptr(), q.as_ptr(), 1, 2, &mut out) }, SteincltStatus::Ok);
    assert!((out - 5.0).abs() < 1e-15);
}

#[test]
fn constants_and_range_errors() {
    let mut c = 0.0;
    assert_eq!(unsafe { steinclt_constant_c(2, &mut c) }, SteincltStatus::Ok);
    assert!((c - 4.0 / (2.0 * std::f64::consts::PI * std::f64::consts::E).sqrt()).abs() < 1e-15);
    assert_eq!(unsafe { steinclt_constant_c(4, &mut c) }, SteincltStatus::InvalidArgument);
    assert!(!last_error().is_empty());
}

#[test]
fn injective_norm_of_tensor_power() {
    // u = (0, 2, 0), u⊗u⊗u has norm 8
    let d = 3;
    let u = [0.0, 2.0, 0.0];
    let mut full = vec![0.0; d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                full[(i * d + j) * d + k] = u[i] * u[j] * u[k];
            }
        }
    }
    let mut out = 0.0;
    assert_eq!(unsafe { steinclt_injective_norm(full.as_ptr(), 3, d, &mut out) }, SteincltStatus::Ok);
    assert!((out - 8.0).abs() < 1e-9);
    let asym = [0.0, 1.0, 0.0, 0.0];
    assert_eq!(
        unsafe { steinclt_injective_norm(asym.as_ptr(), 2, 2, &mut out) },
        SteincltStatus::InvalidArgument
    );
}

#[test]
fn rate_fit_through_c() {
    let n = [4.0, 16.0, 64.0, 256.0];
    let w: Vec<f64> = n.iter().map(|x: &f64| x.powf(-0.5)).collect();
    let mut slope = 0.0;
    assert_eq!(unsafe { steinclt_rate_fit(n.as_ptr(), w.as_ptr(), 4, &mut slope) }, SteincltStatus::Ok);
    assert!((slope + 0.5).abs() < 1e-12);
    assert_eq!(
        unsafe { steinclt_rate_fit(n.as_ptr(), w.as_ptr(), 3, &mut slope) },
        SteincltStatus::InvalidArgument
    );
}

#[test]
fn w1_estimate_is_deterministic() {
    let m = model("uniform", 1, 4);
    let mut a = SteincltW1::default();
    let mut b = SteincltW1::default();
    assert_eq!(unsafe { steinclt_model_w1_estimate(m, 200, 20, 11, &mut a) }, SteincltStatus::Ok);
    assert_eq!(unsafe { steinclt_model_w1_estimate(m, 200, 20, 11, &mut b) }, SteincltStatus::Ok);
    assert_eq!(a, b);
    assert!(a.ci_lo <= a.value && a.value <= a.ci_hi);
    assert_eq!(
        unsafe { steinclt_model_w1_estimate(m, 5, 20, 11, &mut a) },
        SteincltStatus::InvalidArgument
    );
    unsafe { steinclt_model_free(m) };
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/steinclt.h")).unwrap();
    for name in [
        "steinclt_version",
        "steinclt_last_error_message",
        "steinclt_model_new",
        "steinclt_model_free",
        "steinclt_model_dim",
        "steinclt_model_bounds",
        "steinclt_model_w1_estimate",
        "steinclt_w1_exact",
        "steinclt_constant_c",
        "steinclt_injective_norm",
        "steinclt_rate_fit",
        "typedef struct SteincltModel SteincltModel",
        "STEINCLT_STATUS_OK = 0",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/steinclt.h");
    let Ok(out) = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c", header])
        .output()
    else {
        eprintln!("no C compiler available; skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
