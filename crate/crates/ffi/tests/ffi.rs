use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use rydberg_cz_ffi::*;

fn ramped() -> *mut RczPulse {
    rcz_pulse_gaussian_ramped(
        8.136114010032289,
        1.1847087304906685,
        -1.8332246079480088,
        1.6930384172097601,
        0.31,
    )
}

#[test]
fn ideal_gate_summary() {
    unsafe {
        let p = ramped();
        let mut s = RczGateSummary::default();
        assert_eq!(rcz_ideal_gate(21.125, p, 1e-10, &mut s), RczStatus::Ok);
        assert!(s.gate_error < 1e-6, "{}", s.gate_error);
        assert!(s.phase_condition_error.abs() < 1e-4);
        assert!((s.mean_rydberg_time - 3.869).abs() < 0.01);
        assert!((rcz_pulse_tau(p) - 8.136114010032289).abs() < 1e-15);
        rcz_pulse_free(p);
    }
}

#[test]
fn null_handles_report_status_and_message() {
    unsafe {
        let mut s = RczGateSummary::default();
        assert_eq!(
            rcz_ideal_gate(21.1, ptr::null(), 1e-10, &mut s),
            RczStatus::NullPointer
        );
        let msg = CStr::from_ptr(rcz_last_error()).to_str().unwrap();
        assert!(msg.contains("pulse"), "{msg}");
        let p = ramped();
        assert_eq!(
            rcz_ideal_gate(21.1, p, 1e-10, ptr::null_mut()),
            RczStatus::NullPointer
        );
        assert!(rcz_pulse_tau(ptr::null()).is_nan());
        assert_eq!(rcz_budget_len(ptr::null()), 0);
        rcz_pulse_free(p);
        rcz_pulse_free(ptr::null_mut());
        rcz_string_free(ptr::null_mut());
    }
}

#[test]
fn invalid_arguments_are_rejected() {
    unsafe {
        let sys = rcz_system_table_one();
        assert_eq!(
            rcz_system_set_temperature(sys, -1.0),
            RczStatus::InvalidArgument
        );
        assert_eq!(rcz_system_set_temperature(sys, 1.5e-6), RczStatus::Ok);
        let p = rcz_pulse_gaussian(-1.0, 0.0, 0.0, 1.0);
        let mut s = RczGateSummary::default();
        assert_ne!(rcz_ideal_gate(21.1, p, 1e-10, &mut s), RczStatus::Ok);
        rcz_pulse_free(p);
        rcz_system_free(sys);
    }
}

#[test]
fn pulse_json_round_trip() {
    unsafe {
        let p = ramped();
        let json = rcz_pulse_to_json(p);
        assert!(!json.is_null());
        let q = rcz_pulse_from_json(json);
        assert!(!q.is_null());
        assert_eq!(rcz_pulse_tau(q), rcz_pulse_tau(p));
        let bad = CString::new("{\"family\":1}").unwrap();
        assert!(rcz_pulse_from_json(bad.as_ptr()).is_null());
        rcz_string_free(json);
        rcz_pulse_free(p);
        rcz_pulse_free(q);
    }
}

#[test]
fn decay_mechanism_matches_estimate() {
    unsafe {
        let sys = rcz_system_table_one();
        assert!((rcz_system_interaction(sys) - 21.125).abs() < 0.01);
        let p = ramped();
        let (mut bell, mut avg, mut analytic, mut conv) = (0.0, 0.0, 0.0, false);
        let st = rcz_mechanism_infidelity(
            sys,
            p,
            RczMechanism::Decay,
            0.0,
            &mut bell,
            &mut avg,
            &mut analytic,
            &mut conv,
        );
        assert_eq!(st, RczStatus::Ok);
        assert!(conv);
        assert!((bell / analytic - 1.0).abs() < 0.02, "{bell} {analytic}");
        assert!(avg < bell);
        rcz_pulse_free(p);
        rcz_system_free(sys);
    }
}

#[test]
fn budget_rows_via_handle() {
    unsafe {
        let sys = rcz_system_table_one();
        let p = ramped();
        let temps = [0.0];
        let mut b: *mut RczBudget = ptr::null_mut();
        assert_eq!(
            rcz_budget_compute(sys, p, temps.as_ptr(), 1, &mut b),
            RczStatus::Ok
        );
        let n = rcz_budget_len(b);
        assert!(n >= 5, "{n}");
        let mut row = RczBudgetRow::default();
        let mut summed = f64::NAN;
        let mut full = f64::NAN;
        for i in 0..n {
            assert_eq!(rcz_budget_row(b, i, &mut row), RczStatus::Ok);
            match row.entry {
                3 => summed = row.bell_infidelity,
                4 => full = row.bell_infidelity,
                _ => {}
            }
        }
        assert!((summed / full - 1.0).abs() < 0.05, "{summed} {full}");
        assert_eq!(rcz_budget_row(b, n, &mut row), RczStatus::InvalidArgument);
        let json = rcz_budget_to_json(b);
        assert!(CStr::from_ptr(json).to_str().unwrap().contains("rows"));
        rcz_string_free(json);
        rcz_budget_free(b);
        rcz_pulse_free(p);
        rcz_system_free(sys);
    }
}

#[test]
fn header_declares_exports_and_compiles() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/rydberg_cz.h")).unwrap();
    for f in [
        "rcz_last_error",
        "rcz_ideal_gate",
        "rcz_optimize",
        "rcz_mechanism_infidelity",
        "rcz_budget_compute",
        "rcz_budget_row",
        "rcz_pulse_free",
        "RCZ_STATUS_INFEASIBLE",
    ] {
        assert!(header.contains(f), "{f} missing from header");
    }
    let Ok(cc) = which_cc() else { return };
    let src = std::env::temp_dir().join(format!("rcz_header_{}.c", std::process::id()));
    std::fs::write(
        &src,
        "#include \"rydberg_cz.h\"\nint main(void) { return rcz_version() == 0; }\n",
    )
    .unwrap();
    let out = Command::new(cc)
        .arg("-fsyntax-only")
        .arg("-Wall")
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&src)
        .output()
        .unwrap();
    let _ = std::fs::remove_file(&src);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc);
        }
    }
    Err(())
}
