use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use hfbeat_ffi::*;

fn last_error() -> String {
    let p = hfb_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn cs_spectrum() -> *mut HfbSpectrum {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { hfb_spectrum_new(7, 3, 7.42, 0.14, &mut s) }, HfbStatus::Ok);
    assert!(!s.is_null());
    s
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(hfb_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn sixj_through_the_abi() {
    let mut out = f64::NAN;
    let args = [6, 8, 4, 3, 3, 7];
    assert_eq!(unsafe { hfb_sixj(args.as_ptr(), &mut out) }, HfbStatus::Ok);
    assert!((out - (1.0f64 / 420.0).sqrt()).abs() < 1e-15);

    let bad = [6, 8, -4, 3, 3, 7];
    assert_eq!(unsafe { hfb_sixj(bad.as_ptr(), &mut out) }, HfbStatus::InvalidArgument);
    assert!(last_error().contains(">= 0"));

    assert_eq!(unsafe { hfb_sixj(ptr::null(), &mut out) }, HfbStatus::NullPointer);
    assert_eq!(unsafe { hfb_sixj(args.as_ptr(), ptr::null_mut()) }, HfbStatus::NullPointer);
}

#[test]
fn cesium_spectrum_components() {
    let s = cs_spectrum();
    assert_eq!(unsafe { hfb_spectrum_len(s) }, 5);
    let mut c0 = 0.0;
    assert_eq!(unsafe { hfb_spectrum_constant(s, &mut c0) }, HfbStatus::Ok);
    assert!((c0 - 0.21869).abs() < 1e-5);

    let mut total = c0;
    let mut comp = HfbBeatComponent::default();
    for k in 0..5 {
        assert_eq!(unsafe { hfb_spectrum_component(s, k, &mut comp) }, HfbStatus::Ok);
        total += comp.amplitude;
    }
    assert!((total - 1.0).abs() < 1e-12);

    assert_eq!(unsafe { hfb_spectrum_component(s, 0, &mut comp) }, HfbStatus::Ok);
    assert_eq!((comp.twice_f, comp.twice_f_prime), (4, 6));
    assert!((comp.nu_mhz - 22.16).abs() < 1e-9);

    assert_eq!(unsafe { hfb_spectrum_component(s, 5, &mut comp) }, HfbStatus::OutOfRange);
    unsafe { hfb_spectrum_free(s) };
}

#[test]
fn g2_and_polarization_agree_with_the_cs_relation() {
    let s = cs_spectrum();
    let (mut g, mut p) = (0.0, 0.0);
    assert_eq!(unsafe { hfb_g2(s, 2.4, 0.02, 10.0, &mut g) }, HfbStatus::Ok);
    assert_eq!(unsafe { hfb_polarization(s, 2.4, 0.02, 10.0, &mut p) }, HfbStatus::Ok);
    assert!((p - 3.0 * g / (20.0 + g)).abs() < 1e-15);

    assert_eq!(unsafe { hfb_g2(s, -1.0, 0.0, 10.0, &mut g) }, HfbStatus::Domain);
    unsafe { hfb_spectrum_free(s) };
}

#[test]
fn spectrum_rejects_bad_systems() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { hfb_spectrum_new(-1, 3, 7.42, 0.0, &mut s) }, HfbStatus::InvalidArgument);
    // J = 1/2 has no quadrupole moment
    assert_eq!(unsafe { hfb_spectrum_new(7, 1, 7.42, 0.5, &mut s) }, HfbStatus::Domain);
    assert!(s.is_null());
    assert_eq!(unsafe { hfb_spectrum_new(7, 3, 7.42, 0.14, ptr::null_mut()) }, HfbStatus::NullPointer);
}

#[test]
fn free_functions_accept_null() {
    unsafe {
        hfb_spectrum_free(ptr::null_mut());
        hfb_dataset_free(ptr::null_mut());
        hfb_fit_result_free(ptr::null_mut());
        hfb_string_free(ptr::null_mut());
    }
    assert_eq!(unsafe { hfb_spectrum_len(ptr::null()) }, 0);
    assert_eq!(unsafe { hfb_dataset_len(ptr::null()) }, 0);
}

fn table_path() -> CString {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data/cs8p_table1.csv");
    CString::new(p.to_str().unwrap()).unwrap()
}

#[test]
fn dataset_load_and_errors() {
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { hfb_dataset_load(table_path().as_ptr(), &mut d) }, HfbStatus::Ok);
    assert_eq!(unsafe { hfb_dataset_len(d) }, 37);
    unsafe { hfb_dataset_free(d) };

    let missing = CString::new("/nonexistent/hfbeat.csv").unwrap();
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { hfb_dataset_load(missing.as_ptr(), &mut d) }, HfbStatus::Io);
    assert!(d.is_null());

    let t = [1.0, 2.0];
    let pl = [0.1, 0.1];
    let sigma = [0.01, 0.0];
    let status = unsafe { hfb_dataset_from_arrays(2, ptr::null(), t.as_ptr(), pl.as_ptr(), sigma.as_ptr(), &mut d) };
    assert_eq!(status, HfbStatus::Validation);
    assert!(last_error().contains("sigma"));
}

#[test]
fn fit_from_arrays_recovers_noiseless_parameters() {
    // noiseless curve for A = 7.42, B = 0.14, dt = 0, W = 0
    let s = cs_spectrum();
    let t: Vec<f64> = (0..60).map(|k| 0.9 + 1.9 * k as f64).collect();
    let pl: Vec<f64> = t
        .iter()
        .map(|&t| {
            let mut p = 0.0;
            assert_eq!(unsafe { hfb_polarization(s, 0.0, 0.0, t, &mut p) }, HfbStatus::Ok);
            p
        })
        .collect();
    unsafe { hfb_spectrum_free(s) };
    let sigma = vec![0.01; t.len()];

    let mut d = ptr::null_mut();
    let status =
        unsafe { hfb_dataset_from_arrays(t.len(), ptr::null(), t.as_ptr(), pl.as_ptr(), sigma.as_ptr(), &mut d) };
    assert_eq!(status, HfbStatus::Ok);

    let opts = HfbFitOptions {
        max_refinements: 40,
        uncertainty: HfbUncertainty::Covariance,
        parallel: false,
    };
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { hfb_fit(d, 7, 3, &opts, &mut r) }, HfbStatus::Ok);

    let mut p = HfbParams::default();
    assert_eq!(unsafe { hfb_fit_result_params(r, &mut p) }, HfbStatus::Ok);
    assert!((p.a_mhz - 7.42).abs() < 1e-6, "{p:?}");
    assert!((p.b_mhz - 0.14).abs() < 1e-5, "{p:?}");
    assert!(p.dt_ns.abs() < 1e-4, "{p:?}");
    assert!(p.w_ns.abs() < 1e-4, "{p:?}");

    let mut red = f64::NAN;
    assert_eq!(unsafe { hfb_fit_result_red_chi2(r, &mut red) }, HfbStatus::Ok);
    assert!(red < 1e-8);

    let mut two = HfbParams::default();
    assert_eq!(unsafe { hfb_fit_result_two_sigma(r, &mut two) }, HfbStatus::Ok);
    assert!(two.a_mhz.is_finite() && two.a_mhz >= 0.0);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { hfb_fit_result_json(r, &mut json) }, HfbStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { hfb_string_free(json) };
    assert!(text.contains("\"A_MHz\""));
    assert!(text.contains("\"uncertainty_method\""));

    unsafe {
        hfb_fit_result_free(r);
        hfb_dataset_free(d);
    }
}

#[test]
fn fit_rejects_system_without_quadrupole() {
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { hfb_dataset_load(table_path().as_ptr(), &mut d) }, HfbStatus::Ok);
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { hfb_fit(d, 7, 1, ptr::null(), &mut r) }, HfbStatus::InvalidArgument);
    assert!(r.is_null());
    unsafe { hfb_dataset_free(d) };
}

#[test]
fn header_is_generated_and_compiles_as_c() {
    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/hfbeat.h");
    let text = std::fs::read_to_string(&header).expect("header written by build.rs");
    for name in ["hfb_sixj", "hfb_spectrum_new", "hfb_fit", "hfb_last_error_message", "HFB_STATUS_OK"] {
        assert!(text.contains(name), "{name} missing from header");
    }

    let Ok(cc) = which_cc() else { return };
    let dir = std::env::temp_dir().join(format!("hfbeat-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("probe.c");
    std::fs::write(
        &src,
        "#include \"hfbeat.h\"\nint main(void) { HfbFitOptions o = hfb_fit_options_default(); return (int)o.uncertainty; }\n",
    )
    .unwrap();
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
