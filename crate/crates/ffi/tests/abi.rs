use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use circle_singular_ffi::*;

fn last_error() -> String {
    let p = cs_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn system_round_trip() {
    let mut sys = ptr::null_mut();
    unsafe {
        assert_eq!(cs_system_build(3, 10, CsOffsetMode::Random, &mut sys), CsStatus::Ok);
        assert_eq!(cs_system_verify(sys), CsStatus::Ok);
        let mut sigma = 0.0;
        assert_eq!(cs_system_sigma(sys, 10, &mut sigma), CsStatus::Ok);
        let mut n = 0usize;
        assert_eq!(cs_system_lefts(sys, 10, ptr::null_mut(), 0, &mut n), CsStatus::BufferTooSmall);
        let mut buf = vec![0.0; n];
        assert_eq!(cs_system_lefts(sys, 10, buf.as_mut_ptr(), n, &mut n), CsStatus::Ok);
        assert_eq!(n, 1024);
        assert!((n as f64 * sigma - std::f64::consts::TAU / 10.0).abs() < 1e-12);
        assert!(buf.windows(2).all(|w| w[0] < w[1]));
        let mut g = 0.0;
        assert_eq!(cs_gauge_cover_sum(sys, 10, &mut g), CsStatus::Ok);
        assert!((g - 4.647157).abs() < 1e-6);
        cs_system_free(sys);
    }
}

#[test]
fn errors_carry_status_and_message() {
    let mut sys = ptr::null_mut();
    unsafe {
        assert_eq!(cs_system_build(1, 99, CsOffsetMode::Zero, &mut sys), CsStatus::InvalidArgument);
        assert!(sys.is_null());
        assert!(last_error().contains("n_max"));
        assert_eq!(cs_system_build(1, 4, CsOffsetMode::Zero, ptr::null_mut()), CsStatus::NullPointer);
        assert!(last_error().contains("out"));
        cs_system_free(ptr::null_mut());
        cs_window_free(ptr::null_mut());
        cs_string_free(ptr::null_mut());
    }
}

#[test]
fn windows_and_asym() {
    let reach = 1i64 << 16;
    let re: Vec<f64> = (-reach..=reach).map(|n| 1.0 / (1.0 + n.abs() as f64)).collect();
    let mut w = ptr::null_mut();
    let mut nu = ptr::null_mut();
    unsafe {
        assert_eq!(cs_window_new(-reach, reach, re.as_ptr(), ptr::null(), &mut w), CsStatus::Ok);
        let (mut lo, mut hi) = (0, 0);
        assert_eq!(cs_window_bounds(w, &mut lo, &mut hi), CsStatus::Ok);
        assert_eq!((lo, hi), (-reach, reach));
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(cs_window_get(w, 3, &mut a, &mut b), CsStatus::Ok);
        assert_eq!((a, b), (0.25, 0.0));
        let mut d = 0.0;
        assert_eq!(cs_fourier_dim_fit(w, &mut d), CsStatus::Ok);
        assert!((d - 1.0).abs() < 1e-12);
        assert_eq!(cs_build_nu(w, 3.0, 1, &mut nu), CsStatus::Ok);
        assert_eq!(cs_window_bounds(nu, &mut lo, &mut hi), CsStatus::Ok);
        assert!(hi > reach);
        cs_window_free(nu);
        cs_window_free(w);
    }
}

#[test]
fn run_json_returns_manifest() {
    let dir = tempfile_dir();
    let cfg = CString::new(format!(
        r#"{{"subcommand":"construct","mode":"zero","n_max":6,"out":{:?}}}"#,
        dir.display().to_string()
    ))
    .unwrap();
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(cs_run_json(cfg.as_ptr(), &mut out), CsStatus::Ok);
        let text = CStr::from_ptr(out).to_str().unwrap().to_owned();
        cs_string_free(out);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    }
    std::fs::remove_dir_all(dir).unwrap();
}

fn tempfile_dir() -> PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join(format!("ffi-run-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

/// Compiles a C client against the generated header and static library.
#[test]
fn c_client_links_and_runs() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    // `cargo test` does not emit the staticlib, so build it in a separate
    // target directory that the running cargo does not hold locked.
    let target = Path::new(env!("CARGO_TARGET_TMPDIR")).join("staticlib");
    let status = Command::new(env!("CARGO"))
        .args(["build", "--release", "--lib", "-p", "circle-singular-ffi", "--target-dir"])
        .arg(&target)
        .status()
        .expect("cargo runs");
    assert!(status.success());
    let lib = target.join("release/libcircle_singular_ffi.a");
    let bin = Path::new(env!("CARGO_TARGET_TMPDIR")).join("ffi_smoke");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-D_DEFAULT_SOURCE")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("cc runs");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok 0.1.0"));
}
