use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use nelson_fiber_ffi::*;

const SMOKE: &str = r#"{
    "grid": {"dimension": 1, "extent": 1.0, "points_per_axis": 3, "mass": 1.0},
    "params": {"g": 1.0, "m": 1.0, "P": [0.3], "window": {"kappa": 0.5, "K_gross": 0.75, "Lambda": 1.0}},
    "n_max": 2,
    "beta_list": [0.5, 1.0]
}"#;

fn last_error() -> String {
    unsafe { CStr::from_ptr(nf_last_error()) }.to_string_lossy().into_owned()
}

fn hamiltonian(json: &str) -> (NfStatus, *mut NfHamiltonian) {
    let c = CString::new(json).unwrap();
    let mut h = ptr::null_mut();
    let s = unsafe { nf_hamiltonian_new(c.as_ptr(), &mut h) };
    (s, h)
}

#[test]
fn assemble_and_inspect() {
    let (s, h) = hamiltonian(SMOKE);
    assert_eq!(s, NfStatus::Ok, "{}", last_error());
    let (mut modes, mut dim) = (0, 0);
    assert_eq!(unsafe { nf_hamiltonian_shape(h, &mut modes, &mut dim) }, NfStatus::Ok);
    assert_eq!((modes, dim), (3, 10));

    let (mut el, mut ek, mut ew) = (0.0, 0.0, 0.0);
    assert_eq!(unsafe { nf_hamiltonian_energies(h, &mut el, &mut ek, &mut ew) }, NfStatus::Ok);
    assert!(el <= ek && el < 0.0);
    assert!((ew - (el - ek)).abs() < 1e-12);

    let mut required = 0;
    let mut small = vec![0.0; 4];
    let s = unsafe { nf_hamiltonian_copy(h, NfOperator::Renormalized, small.as_mut_ptr(), small.len(), &mut required) };
    assert_eq!(s, NfStatus::BufferTooSmall);
    assert_eq!(required, 100);
    let mut full = vec![0.0; required];
    let s = unsafe { nf_hamiltonian_copy(h, NfOperator::Renormalized, full.as_mut_ptr(), full.len(), ptr::null_mut()) };
    assert_eq!(s, NfStatus::Ok);
    for i in 0..10 {
        for j in 0..10 {
            assert!((full[i * 10 + j] - full[j * 10 + i]).abs() < 1e-12);
        }
    }

    let mut g = NfGroundState::default();
    assert_eq!(unsafe { nf_hamiltonian_ground(h, NfOperator::Renormalized, 1e-8, 1e-12, &mut g) }, NfStatus::Ok);
    assert!(g.strictly_positive && !g.degenerate && g.gap > 0.0);
    let mut min = -1.0;
    assert_eq!(unsafe { nf_semigroup_min_entry(h, NfOperator::Renormalized, 1.0, &mut min) }, NfStatus::Ok);
    assert!(min > 0.0);
    assert_eq!(unsafe { nf_semigroup_min_entry(h, NfOperator::Full, f64::NAN, &mut min) }, NfStatus::InvalidArgument);
    unsafe { nf_hamiltonian_free(h) };
}

#[test]
fn errors_are_reported() {
    let bad = SMOKE.replace(r#""kappa": 0.5"#, r#""kappa": 1.0"#);
    let (s, h) = hamiltonian(&bad);
    assert_eq!(s, NfStatus::CutoffOrder);
    assert!(h.is_null());
    assert!(last_error().contains("κ < Λ"), "{}", last_error());

    let (s, _) = hamiltonian("{ not json");
    assert_eq!(s, NfStatus::Config);

    let mut h = ptr::null_mut();
    assert_eq!(unsafe { nf_hamiltonian_new(ptr::null(), &mut h) }, NfStatus::NullPointer);
    let mut modes = 0;
    assert_eq!(unsafe { nf_hamiltonian_shape(ptr::null(), &mut modes, &mut modes) }, NfStatus::NullPointer);

    let (s, h) = hamiltonian(SMOKE);
    assert_eq!(s, NfStatus::Ok);
    assert_eq!(last_error(), "");
    unsafe { nf_hamiltonian_free(h) };
    unsafe { nf_hamiltonian_free(ptr::null_mut()) };
}

#[test]
fn run_suite_through_handle() {
    let c = CString::new(SMOKE).unwrap();
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { nf_run(c.as_ptr(), &mut r) }, NfStatus::Ok, "{}", last_error());
    let (mut passed, mut total, mut failed) = (false, 0, 0);
    assert_eq!(unsafe { nf_run_summary(r, &mut passed, &mut total, &mut failed) }, NfStatus::Ok);
    assert!(passed && total > 40 && failed < total);
    let json = unsafe { CStr::from_ptr(nf_run_report_json(r)) }.to_str().unwrap().to_owned();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["kind"], "run");
    assert_eq!(v["mode_count"], 3);
    unsafe { nf_run_free(r) };
    assert!(unsafe { nf_run_report_json(ptr::null()) }.is_null());
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(nf_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(crate_dir().join("include/nelson_fiber.h")).unwrap();
    for name in [
        "nf_last_error",
        "nf_version",
        "nf_hamiltonian_new",
        "nf_hamiltonian_free",
        "nf_hamiltonian_shape",
        "nf_hamiltonian_energies",
        "nf_hamiltonian_copy",
        "nf_hamiltonian_ground",
        "nf_semigroup_min_entry",
        "nf_run",
        "nf_run_summary",
        "nf_run_report_json",
        "nf_run_free",
        "typedef struct NfHamiltonian NfHamiltonian",
        "NF_STATUS_BUFFER_TOO_SMALL = 8",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

/// Compiles the C example against the header and the static library.
#[test]
fn c_example_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libnelson_fiber_ffi.a");
    assert!(lib.exists(), "static library not built at {}", lib.display());
    let out = tempfile_path("smoke_c");
    let status = Command::new("cc")
        .arg(crate_dir().join("examples/smoke.c"))
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let run = Command::new(&out).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).contains("modes 3 dim 10"));
}

fn tempfile_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("{name}_{}", std::process::id()))
}
