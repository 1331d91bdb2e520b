use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use lyap3_ffi::*;

const LAMBDA_TOML: &str = "[q]\nkind = \"constant\"\nvalue = 28.0\n";

fn scenario(src: &str) -> *mut Lyap3Scenario {
    let toml = CString::new(src).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { lyap3_scenario_from_toml(toml.as_ptr(), &mut s) }, Lyap3Status::Ok);
    assert!(!s.is_null());
    s
}

fn last_error() -> String {
    let p = lyap3_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn threshold_and_null_checks() {
    let mut t = 0.0;
    assert_eq!(unsafe { lyap3_threshold_power(0.0, 1.0, 1.0, 1.0, &mut t) }, Lyap3Status::Ok);
    assert_eq!(t, 4.0);
    assert_eq!(unsafe { lyap3_threshold_power(0.0, 1.0, 1.0, 1.0, ptr::null_mut()) }, Lyap3Status::NullPointer);
    assert!(last_error().contains("out"));
    assert_eq!(unsafe { lyap3_threshold_power(1.0, 1.0, 1.0, 1.0, &mut t) }, Lyap3Status::InvalidConfig);
}

#[test]
fn bc1_round_trip() {
    let s = scenario(LAMBDA_TOML);
    let mut failed = 99;
    assert_eq!(unsafe { lyap3_scenario_failed_checks(s, &mut failed) }, Lyap3Status::Ok);
    assert_eq!(failed, 0);

    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { lyap3_solve_bc1(s, &mut sol) }, Lyap3Status::Ok);
    let (mut a, mut b, mut xi, mut max_u) = (0.0, 0.0, 0.0, 0.0);
    assert_eq!(unsafe { lyap3_bc1_summary(sol, &mut a, &mut b, &mut xi, &mut max_u) }, Lyap3Status::Ok);
    assert_eq!((a, b), (0.0, 1.0));
    assert!(xi > 0.0 && xi < 1.0 && max_u > 0.0);
    let mut u = f64::NAN;
    assert_eq!(unsafe { lyap3_bc1_u_at(sol, 1.0, &mut u) }, Lyap3Status::Ok);
    assert!(u.abs() < 1e-8);

    let mut r = std::mem::MaybeUninit::<Lyap3Report>::uninit();
    assert_eq!(unsafe { lyap3_verify_bc1(sol, false, r.as_mut_ptr()) }, Lyap3Status::Ok);
    let r = unsafe { r.assume_init() };
    assert_eq!(r.verdict, Lyap3Verdict::Holds);
    assert!(r.holds && r.threshold == 4.0 && r.c.is_nan());
    assert_eq!(r.xi, xi);

    unsafe {
        lyap3_bc1_free(sol);
        lyap3_scenario_free(s);
        lyap3_bc1_free(ptr::null_mut());
    }
}

#[test]
fn bc2_and_zero_count() {
    let s = scenario("[q]\nkind = \"constant\"\nvalue = 100.0\n[bc2]\nhorizon = 4.0\n[interval]\na = 0.0\nb = 3.0\n");
    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { lyap3_solve_bc2(s, &mut sol) }, Lyap3Status::Ok);
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    assert_eq!(unsafe { lyap3_bc2_zeros(sol, &mut a, &mut b, &mut c) }, Lyap3Status::Ok);
    assert!(a < b && b < c);
    let mut reports = [std::mem::MaybeUninit::<Lyap3Report>::uninit(); 3];
    assert_eq!(unsafe { lyap3_verify_bc2(sol, reports[0].as_mut_ptr()) }, Lyap3Status::Ok);
    let full = unsafe { reports[2].assume_init() };
    assert_eq!(full.c, c);

    let (mut n, mut bound) = (0u32, 0.0);
    assert_eq!(unsafe { lyap3_zero_count(s, &mut n, &mut bound) }, Lyap3Status::Ok);
    assert!(n >= 1 && f64::from(n) <= bound);
    unsafe {
        lyap3_bc2_free(sol);
        lyap3_scenario_free(s);
    }
}

#[test]
fn error_codes_from_core() {
    let s = scenario("[q]\nkind = \"constant\"\nvalue = 0.0\n");
    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { lyap3_solve_bc1(s, &mut sol) }, Lyap3Status::NoSolution);
    assert!(sol.is_null());
    assert!(!last_error().is_empty());
    unsafe { lyap3_scenario_free(s) };

    let bad = CString::new("nonsense = [").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { lyap3_scenario_from_toml(bad.as_ptr(), &mut h) }, Lyap3Status::InvalidConfig);
    let bytes = [0xffu8, 0];
    assert_eq!(unsafe { lyap3_scenario_from_toml(bytes.as_ptr().cast(), &mut h) }, Lyap3Status::InvalidUtf8);
}

fn header() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/lyap3.h")
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(header()).unwrap();
    let src = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(h.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(h.contains("LYAP3_STATUS_NO_SOLUTION = 2"));
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let status = std::process::Command::new(cc)
        .args(["-fsyntax-only", "-std=c99", "-Wall", "-Werror", "-x", "c"])
        .arg(header())
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| std::process::Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
