use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use normbranch_ffi::*;

fn last_error() -> String {
    let p = nb_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn parse(text: &str) -> *mut NbSpec {
    let c = CString::new(text).unwrap();
    let mut spec = ptr::null_mut();
    let status = unsafe { nb_spec_parse(c.as_ptr(), &mut spec) };
    assert_eq!(status, NbStatus::Ok, "{}", last_error());
    spec
}

#[test]
fn parse_and_evaluate() {
    let spec = parse("1*s^3 + 2*s^5");
    let mut g = 0.0;
    assert_eq!(unsafe { nb_spec_eval_g(spec, 2.0, &mut g) }, NbStatus::Ok);
    assert!((g - (8.0 + 64.0)).abs() < 1e-12);
    unsafe { nb_spec_free(spec) };
}

#[test]
fn bad_spec_reports_domain_error() {
    let c = CString::new("1*s^0.5").unwrap();
    let mut spec = ptr::null_mut();
    let status = unsafe { nb_spec_parse(c.as_ptr(), &mut spec) };
    assert_eq!(status, NbStatus::Domain);
    assert!(spec.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn null_arguments_are_rejected() {
    let mut spec = ptr::null_mut();
    assert_eq!(unsafe { nb_spec_parse(ptr::null(), &mut spec) }, NbStatus::NullPointer);
    let mut pt = NbBranchPoint::default();
    assert_eq!(unsafe { nb_profile_point(ptr::null(), &mut pt) }, NbStatus::NullPointer);
    assert_eq!(unsafe { nb_curve_len(ptr::null()) }, 0);
    unsafe {
        nb_spec_free(ptr::null_mut());
        nb_profile_free(ptr::null_mut());
        nb_curve_free(ptr::null_mut());
        nb_normalized_free(ptr::null_mut());
    }
}

#[test]
fn shoot_cubic_line_soliton() {
    let spec = parse("1*s^3");
    let mut prof = ptr::null_mut();
    let status = unsafe { nb_shoot(spec, 1, 1.0, &mut prof) };
    assert_eq!(status, NbStatus::Ok, "{}", last_error());
    let mut pt = NbBranchPoint::default();
    assert_eq!(unsafe { nb_profile_point(prof, &mut pt) }, NbStatus::Ok);
    assert!((pt.mass - 4.0).abs() < 1e-8);
    let (mut u, mut du) = (0.0, 0.0);
    assert_eq!(unsafe { nb_profile_eval(prof, 1.0, &mut u, &mut du) }, NbStatus::Ok);
    let sech = 1.0 / 1f64.cosh();
    assert!((u - 2f64.sqrt() * sech).abs() < 1e-7);
    assert!((du + 2f64.sqrt() * sech * 1f64.tanh()).abs() < 1e-7);
    assert_eq!(
        unsafe { nb_profile_eval(prof, -1.0, &mut u, &mut du) },
        NbStatus::Domain
    );
    unsafe {
        nb_profile_free(prof);
        nb_spec_free(spec);
    }
}

#[test]
fn negative_frequency_is_domain_error() {
    let spec = parse("1*s^3");
    let mut prof = ptr::null_mut();
    assert_eq!(unsafe { nb_shoot(spec, 1, -1.0, &mut prof) }, NbStatus::Domain);
    assert!(prof.is_null());
    assert!(last_error().contains("lambda"));
    unsafe { nb_spec_free(spec) };
}

#[test]
fn sweep_and_index() {
    let spec = parse("1*s^3");
    let mut curve = ptr::null_mut();
    let status = unsafe { nb_branch_sweep(spec, 1, 0.1, 10.0, 2, &mut curve) };
    assert_eq!(status, NbStatus::Ok, "{}", last_error());
    let len = unsafe { nb_curve_len(curve) };
    assert_eq!(len, 5);
    assert_eq!(unsafe { nb_curve_failures(curve) }, 0);
    for i in 0..len {
        let mut pt = NbBranchPoint::default();
        assert_eq!(unsafe { nb_curve_point(curve, i, &mut pt) }, NbStatus::Ok);
        assert!((pt.mass - 4.0 * pt.lambda.sqrt()).abs() < 1e-7 * pt.mass);
    }
    let mut pt = NbBranchPoint::default();
    assert_eq!(unsafe { nb_curve_point(curve, len, &mut pt) }, NbStatus::OutOfRange);
    unsafe {
        nb_curve_free(curve);
        nb_spec_free(spec);
    }
}

#[test]
fn ground_state_townes_mass() {
    let (mut mass, mut u0) = (0.0, 0.0);
    assert_eq!(
        unsafe { nb_ground_state(2, 3.0, 1.0, &mut mass, &mut u0) },
        NbStatus::Ok
    );
    assert!((mass - 11.700896).abs() < 1e-5);
    assert!((u0 - 2.206200).abs() < 1e-5);
    assert_eq!(
        unsafe { nb_ground_state(0, 3.0, 1.0, &mut mass, &mut u0) },
        NbStatus::Domain
    );
}

#[test]
fn normalize_single_root() {
    let spec = parse("1*s^3");
    let mut rep = ptr::null_mut();
    let status = unsafe { nb_normalize(spec, 1, 2.0, 1e-4, 1e4, 8, &mut rep) };
    assert_eq!(status, NbStatus::Ok, "{}", last_error());
    let case = unsafe { CStr::from_ptr(nb_normalized_case(rep)) };
    assert_eq!(case.to_str().unwrap(), "i");
    assert_eq!(unsafe { nb_normalized_prediction_met(rep) }, 1);
    assert_eq!(unsafe { nb_normalized_root_count(rep) }, 1);
    let mut pt = NbBranchPoint::default();
    assert_eq!(unsafe { nb_normalized_root(rep, 0, &mut pt) }, NbStatus::Ok);
    assert!((pt.lambda - 0.25).abs() < 1e-5);
    unsafe {
        nb_normalized_free(rep);
        nb_spec_free(spec);
    }
}

#[test]
fn status_names_are_static() {
    let name = unsafe { CStr::from_ptr(nb_status_name(NbStatus::SweepDegenerate)) };
    assert_eq!(name.to_str().unwrap(), "sweep-degenerate");
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/normbranch.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in [
        "nb_spec_parse",
        "nb_shoot",
        "nb_branch_sweep",
        "nb_normalize",
        "nb_last_error",
        "NB_STATUS_OK",
    ] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        return;
    };
    if !cc.status.success() {
        return;
    }
    let dir = tempfile_dir();
    let src = dir.join("use_header.c");
    std::fs::write(
        &src,
        "#include \"normbranch.h\"\nint main(void) { NbBranchPoint p; (void)p; return NB_STATUS_OK; }\n",
    )
    .unwrap();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("ffi-header");
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
