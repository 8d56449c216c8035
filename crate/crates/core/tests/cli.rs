//! Exit codes and output of the command-line tool.

use std::io::Write;
use std::process::{Command, Output};

fn orfkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orfkit")).args(args).output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    orfkit(args).status.code().unwrap()
}

#[test]
fn usage_errors_exit_with_2() {
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["bounds", "--d", "1"]), 2);
    assert_eq!(code(&["--workers", "0", "bounds"]), 2);
    assert_eq!(code(&["mc", "--estimator", "rff", "--quantity", "covariance", "--s", "200"]), 2);
    assert_eq!(code(&["bias", "--z-step", "0"]), 2);
}

#[test]
fn io_errors_exit_with_4() {
    assert_eq!(code(&["mse", "--dataset", "/nonexistent/points.csv"]), 4);
    assert_eq!(code(&["bounds", "--out", "/nonexistent/dir/b.csv"]), 4);
}

#[test]
fn bad_dataset_is_reported_with_its_position() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(b"1,2\n3,x\n5,6\n").unwrap();
    let out = orfkit(&["mse", "--dataset", f.path().to_str().unwrap(), "--p", "4"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("row 2") && msg.contains("column 2"), "{msg}");
}

#[test]
fn dataset_with_label_column() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(b"x1;x2;label\n0.1;1.0;a\n0.7;-0.3;b\n-1.2;0.4;a\n0.3;0.9;b\n").unwrap();
    let path = f.path().to_str().unwrap();
    let out = orfkit(&[
        "mse", "--dataset", path, "--delimiter", ";", "--header", "--drop-label-col", "2",
        "--p", "3", "--trials", "2", "--format", "json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["dataset"]["n"], 4);
    assert_eq!(v["config"]["dataset"]["d"], 2);
    assert!(v["mse"][0]["fraction_in_dominance_interval"].is_number());
}

#[test]
fn zeros_table() {
    let out = orfkit(&["zeros", "--d", "3", "--m", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,zero,rayleigh_partial,rayleigh_limit"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert!((first[1] - std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn json_report_records_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mc.json");
    let status = Command::new(env!("CARGO_BIN_EXE_orfkit"))
        .args(["mc", "--d", "8", "--p", "4", "--s", "30", "--repeats", "2", "--seed", "5"])
        .args(["--format", "json", "--out", path.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let report = orfkit::harness::report::read_json_report(&path).unwrap();
    assert_eq!(report.config.seed, 5);
    assert_eq!(report.records.len(), 4);
    assert_eq!(report.rng, orfkit::sampling::RNG_ID);
}
