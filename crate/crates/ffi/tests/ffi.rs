use macrospin_ffi::*;
use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    let n = unsafe { ms_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_cargo_version() {
    let v = unsafe { CStr::from_ptr(ms_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn maximally_mixed_round_trip() {
    unsafe {
        let mut rho = ptr::null_mut();
        assert_eq!(ms_density_maximally_mixed(4, &mut rho), MsStatus::Ok);
        assert_eq!(ms_density_dim(rho), 5);
        let mut p = [0.0; 5];
        assert_eq!(ms_outcome_distribution(rho, p.as_mut_ptr(), p.len()), MsStatus::Ok);
        for v in p {
            assert!((v - 0.2).abs() < 1e-15);
        }
        let mut short = [0.0; 3];
        assert_eq!(ms_outcome_distribution(rho, short.as_mut_ptr(), short.len()), MsStatus::BufferTooSmall);
        ms_density_free(rho);
    }
}

#[test]
fn coherent_q_peaks_at_direction() {
    unsafe {
        let mut rho = ptr::null_mut();
        assert_eq!(ms_density_coherent(20, 0.7, 1.1, &mut rho), MsStatus::Ok);
        let mut q = 0.0;
        assert_eq!(ms_husimi_q(rho, 0.7, 1.1, &mut q), MsStatus::Ok);
        assert!((q - 21.0 / (4.0 * std::f64::consts::PI)).abs() < 1e-12);
        let mut d = f64::NAN;
        assert_eq!(ms_parity_correlation(rho, 1.0, 0.0, 0.0, &mut d), MsStatus::Ok);
        assert!((d - 1.0).abs() < 1e-12);
        ms_density_free(rho);
    }
}

#[test]
fn partition_and_coarse_probabilities() {
    unsafe {
        let mut part = ptr::null_mut();
        assert_eq!(ms_partition_new(8, 3, true, &mut part), MsStatus::Ok);
        assert_eq!(ms_partition_len(part), 3);
        let mut labels = [0.0; 3];
        assert_eq!(ms_partition_labels(part, labels.as_mut_ptr(), 3), MsStatus::Ok);
        assert_eq!(labels, [-3.0, 0.0, 3.0]);

        let mut rho = ptr::null_mut();
        ms_density_maximally_mixed(8, &mut rho);
        let mut p = [0.0; 3];
        assert_eq!(ms_coarse_probabilities(rho, part, p.as_mut_ptr(), 3), MsStatus::Ok);
        for v in p {
            assert!((v - 1.0 / 3.0).abs() < 1e-14);
        }
        let mut d = f64::NAN;
        assert_eq!(ms_disturbance_average(rho, part, &mut d), MsStatus::Ok);
        assert!(d.is_finite() && d >= 0.0);
        let mut tvd = f64::NAN;
        assert_eq!(ms_quantum_q_band_distance(rho, part, &mut tvd), MsStatus::Ok);
        assert!((0.0..=1.0).contains(&tvd));

        let mut other = ptr::null_mut();
        ms_density_maximally_mixed(4, &mut other);
        assert_eq!(ms_coarse_probabilities(other, part, p.as_mut_ptr(), 3), MsStatus::DimensionMismatch);
        ms_density_free(other);
        ms_density_free(rho);
        ms_partition_free(part);
    }
}

#[test]
fn error_codes_and_messages() {
    unsafe {
        let mut part = ptr::null_mut();
        assert_eq!(ms_partition_new(8, 4, true, &mut part), MsStatus::NonDivisorSlotWidth);
        assert!(part.is_null());
        assert!(!last_error().is_empty());

        let mut rho = ptr::null_mut();
        assert_eq!(ms_density_coherent(4, 4.0, 0.0, &mut rho), MsStatus::InvalidArgument);
        assert!(rho.is_null());

        let mut q = 0.0;
        assert_eq!(ms_husimi_q(ptr::null(), 0.0, 0.0, &mut q), MsStatus::NullPointer);
        assert!(last_error().contains("null"));
        assert_eq!(ms_density_dim(ptr::null()), 0);
        ms_density_free(ptr::null_mut());
        ms_partition_free(ptr::null_mut());
    }
}

#[test]
fn lg_entry_points() {
    let x = 1.054;
    assert!((ms_k_analytic(x) - 2.48).abs() < 0.01);
    let mut k = 0.0;
    assert_eq!(unsafe { ms_k_exact_parity(1, 0.3, &mut k) }, MsStatus::Ok);
    let expect = 3.0 * (0.15f64).cos() - (0.45f64).cos();
    assert!((k - expect).abs() < 1e-12);

    unsafe {
        let mut part = ptr::null_mut();
        ms_partition_new(40, 41, true, &mut part);
        let mut k = f64::NAN;
        assert_eq!(ms_coarse_lg(part, 1.0, 0.1, &mut k), MsStatus::Ok);
        assert!(k.abs() <= 2.0 + 1e-12);
        ms_partition_free(part);
    }
}

#[test]
fn header_parses_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/macrospin.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["ms_density_coherent", "ms_partition_new", "ms_last_error_message", "MS_STATUS_OK"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    match Command::new("cc").args(["-fsyntax-only", "-x", "c"]).arg(&header).status() {
        Ok(s) => assert!(s.success()),
        Err(_) => eprintln!("cc unavailable; skipped syntax check"),
    }
}
