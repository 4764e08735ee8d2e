use std::ffi::{CStr, CString};
use std::ptr;

use crossdiff_ffi::*;

fn last_error() -> String {
    let p = crossdiff_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn entropy_roundtrip_and_domain_error() {
    let (mut w1, mut w2) = (0.0, 0.0);
    assert_eq!(crossdiff_entropy_gradient(0.2, 0.3, &mut w1, &mut w2), CdStatus::Ok);
    assert!((w1 - (0.2f64 / 0.5).ln()).abs() < 1e-15);
    let (mut u1, mut u2) = (0.0, 0.0);
    assert_eq!(crossdiff_entropy_gradient_inverse(w1, w2, &mut u1, &mut u2), CdStatus::Ok);
    assert!((u1 - 0.2).abs() < 1e-15 && (u2 - 0.3).abs() < 1e-15);

    assert_eq!(crossdiff_entropy_gradient(0.7, 0.4, &mut w1, &mut w2), CdStatus::Domain);
    assert!(last_error().contains("requires"));
    assert_eq!(crossdiff_entropy_gradient(0.2, 0.3, ptr::null_mut(), &mut w2), CdStatus::NullPointer);
}

#[test]
fn coefficient_checks() {
    let mut set = ptr::null_mut();
    assert_eq!(crossdiff_coeffs_from_free(1.0, 1.0, 1.0, 0.5, 1.0, &mut set), CdStatus::Ok);
    let mut passed = false;
    let mut margin = 0.0;
    assert_eq!(crossdiff_check(set, CdCheck::PsdIff, &mut passed, &mut margin), CdStatus::Ok);
    assert!(passed);
    assert_eq!(margin, 1.0);
    let mut eps = 0.0;
    assert_eq!(crossdiff_epsilon_max(set, &mut eps), CdStatus::Ok);
    assert_eq!(eps, 1.0);
    let mut scan = CdSpectralScan::default();
    assert_eq!(crossdiff_oracle_scan(set, 32, &mut scan), CdStatus::Ok);
    assert!(scan.weighted_min >= eps - 1e-9 && scan.samples > 0);
    crossdiff_coeffs_free(set);

    let mut bad = ptr::null_mut();
    assert_eq!(crossdiff_coeffs_from_free(1.0, 1.0, 0.0, 2.0, 0.0, &mut bad), CdStatus::Ok);
    assert_eq!(crossdiff_check(bad, CdCheck::PsdIff, &mut passed, ptr::null_mut()), CdStatus::Ok);
    assert!(!passed);
    assert_eq!(crossdiff_epsilon_max(bad, &mut eps), CdStatus::Precondition);
    crossdiff_coeffs_free(bad);

    // A nonsymmetric set: checks that need symmetry fail with a precondition.
    let alpha = [1.0, 0.5, 0.0, 1.0];
    let zero = [0.0; 4];
    let mut ns = ptr::null_mut();
    assert_eq!(crossdiff_coeffs_new(alpha.as_ptr(), zero.as_ptr(), zero.as_ptr(), &mut ns), CdStatus::Ok);
    assert_eq!(crossdiff_check(ns, CdCheck::Symmetry, &mut passed, ptr::null_mut()), CdStatus::Ok);
    assert!(!passed);
    assert_eq!(crossdiff_check(ns, CdCheck::TheoremStrict, &mut passed, ptr::null_mut()), CdStatus::Precondition);
    crossdiff_coeffs_free(ns);

    let skt = [1.0, 1.0, 0.5, 0.5, 0.5, 0.5];
    let mut s = ptr::null_mut();
    assert_eq!(crossdiff_coeffs_from_skt(skt.as_ptr(), &mut s), CdStatus::Ok);
    assert_eq!(crossdiff_check(s, CdCheck::TheoremStrict, &mut passed, ptr::null_mut()), CdStatus::Ok);
    assert!(passed);
    crossdiff_coeffs_free(s);
    crossdiff_coeffs_free(ptr::null_mut());
}

const CONFIG: &str = r#"
schema_version = 1
[coefficients]
kind = "skt"
a10 = 1.0
a20 = 1.0
a11 = 0.5
a12 = 0.5
a21 = 0.5
a22 = 0.5
[grid]
n_cells = 10
[initial]
profile = "cosine"
u1 = 0.3
u2 = 0.3
amp1 = 0.2
amp2 = -0.2
[time]
tau = 1e-2
t_end = 1.0
"#;

#[test]
fn simulation_handle() {
    let doc = CString::new(CONFIG).unwrap();
    let mut sim = ptr::null_mut();
    assert_eq!(crossdiff_sim_from_config(doc.as_ptr(), &mut sim), CdStatus::Ok);
    assert_eq!(crossdiff_sim_n_cells(sim), 10);
    let mut d0 = CdDiagnostics::default();
    assert_eq!(crossdiff_sim_diagnostics(sim, &mut d0), CdStatus::Ok);
    let mut d = CdDiagnostics::default();
    for _ in 0..5 {
        assert_eq!(crossdiff_sim_step(sim, 0.0, &mut d), CdStatus::Ok);
    }
    assert_eq!(d.step, 5);
    assert!((crossdiff_sim_time(sim) - 0.05).abs() < 1e-14);
    assert!(d.entropy_raw < d0.entropy_raw);
    assert!((d.mass1 - d0.mass1).abs() < 1e-12);

    let (mut u1, mut u2) = (vec![0.0; 10], vec![0.0; 10]);
    assert_eq!(crossdiff_sim_densities(sim, u1.as_mut_ptr(), u2.as_mut_ptr(), 10), CdStatus::Ok);
    assert!(u1.iter().zip(&u2).all(|(a, b)| *a > 0.0 && *b > 0.0 && a + b < 1.0));
    assert_eq!(crossdiff_sim_densities(sim, u1.as_mut_ptr(), u2.as_mut_ptr(), 9), CdStatus::InvalidArgument);
    assert_eq!(crossdiff_sim_step(sim, f64::NAN, ptr::null_mut()), CdStatus::Ok);
    crossdiff_sim_free(sim);

    let bad = CString::new(CONFIG.replace("tau = 1e-2\n", "")).unwrap();
    let mut sim = ptr::null_mut();
    assert_eq!(crossdiff_sim_from_config(bad.as_ptr(), &mut sim), CdStatus::Config);
    assert!(sim.is_null());
    assert!(last_error().contains("tau"));
    assert_eq!(crossdiff_sim_n_cells(ptr::null()), 0);
}

#[test]
fn header_is_valid_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/crossdiff.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in ["crossdiff_sim_step", "crossdiff_check", "CD_STATUS_TAU_UNDERFLOW", "typedef struct CdCoeffSet CdCoeffSet"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    // Compile a translation unit including the header when a C compiler exists.
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(&src, "#include \"crossdiff.h\"\nint main(void) { CdCoeffSet *c = 0; return (int)crossdiff_coeffs_from_free(1, 1, 1, 0.5, 1, &c); }\n").unwrap();
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| std::process::Command::new(c).arg("--version").output().is_ok())
        .ok_or(())
}
