//! The `mollow` binary end to end.

use std::path::Path;
use std::process::{Command, Output};

fn mollow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mollow")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("scan.toml");
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn error_line(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.lines().last().unwrap()).unwrap()
}

const SMALL: &str = "axis_min = -10.0\naxis_max = 10.0\naxis_count = 5\ng = 0.1\nn_cavity = 4\n";

#[test]
fn scan_writes_csv_into_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out_dir = dir.path().join("out");
    let out = mollow(&["scan", "--config", &cfg, "--out", out_dir.to_str().unwrap(), "--workers", "2", "--seedless"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(out_dir.join("scan.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("axis,n_a,g2,d_na,d_g2,residual,n_cavity,n_mech"));
    assert_eq!(lines.count(), 5);
}

#[test]
fn json_and_svg_formats() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = mollow(&["scan", "--config", &cfg, "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
    let out = mollow(&["scan", "--config", &cfg, "--format", "svg"]);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("<svg"));
}

#[test]
fn unknown_key_is_a_machine_readable_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "axis_cuont = 5\n");
    let out = mollow(&["scan", "--config", &cfg]);
    assert!(!out.status.success());
    let e = error_line(&out);
    assert_eq!(e["error"], "configuration");
    assert!(e["message"].as_str().unwrap().contains("axis_cuont"));
}

#[test]
fn bad_flag_and_bad_format_are_usage_errors() {
    for args in [&["scan", "--frobnicate"][..], &["scan", "--format", "xml"][..]] {
        let out = mollow(args);
        assert_eq!(out.status.code(), Some(2));
        assert_eq!(error_line(&out)["error"], "usage");
    }
}

#[test]
fn failing_point_keeps_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "axis_min = -30.0\naxis_max = 0.0\naxis_count = 4\nn_cavity = 2\nmax_cavity = 4\ntruncation = \"ladder\"\ntruncation_tol = 1e-4\n",
    );
    let out = mollow(&["scan", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert_eq!(error_line(&out)["error"], "truncation-nonconvergence");
    let text = std::fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 3);
    assert!(text.lines().last().unwrap().starts_with("# failed index=2"));
}

#[test]
fn unwritable_out_dir_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = mollow(&["scan", "--config", &cfg, "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(error_line(&out)["error"], "io");
}

#[test]
fn oracle_check_and_calibrate() {
    let out = mollow(&["oracle"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["discrepancies"][0]["relative_error"].as_f64().unwrap() < 1e-4);

    let out = mollow(&["check"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.as_array().unwrap().iter().all(|c| c["passed"] == true));

    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "calibration_count = 161\nn_cavity = 4\n");
    let out = mollow(&["calibrate", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("windows.json")).unwrap()).unwrap();
    let center = table["windows"]["center"].as_f64().unwrap();
    let right = table["windows"]["side_right"].as_f64().unwrap();
    // Side peaks sit at the Rabi splitting 2 sqrt(mu1) Omega.
    let rabi = 2.0 * 0.5f64.sqrt() * 8.0;
    assert!(center.abs() < 0.1 && (right - rabi).abs() < 0.25, "{center} {right}");
}
