//! End-to-end smoke tests against the compiled binary.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_coneval"));
    c.env("RUST_LOG", "warn");
    c
}

fn run_ok(args: &[&str]) {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "coneval {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn subspace_build_verify_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let sub = dir.path().join("sub.json");
    let k = dir.path().join("k.json");
    let report = dir.path().join("report.json");

    run_ok(&["subspace", "--family", "full", "--n", "2", "--d", "1", "--out", sub.to_str().unwrap()]);
    run_ok(&[
        "build-random", "--subspace", sub.to_str().unwrap(), "--alpha", "0.5", "-t", "400",
        "--seed", "1", "--out", k.to_str().unwrap(),
    ]);
    run_ok(&[
        "verify", "--body", sub.to_str().unwrap(), "--polytope", k.to_str().unwrap(),
        "--directions", "300", "--oracle", "eigen", "--alpha", "0.5", "--seed", "2",
        "--out", report.to_str().unwrap(),
    ]);

    // artifact round-trip: parse then reserialize byte-identically
    for path in [&sub, &k, &report] {
        let text = read(path);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        let again = serde_json::to_string_pretty(&value).unwrap();
        assert_eq!(text, again, "{} does not round-trip", path.display());
    }
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let sub = dir.path().join("sub.json");
    run_ok(&["subspace", "--family", "full", "--n", "2", "--d", "1", "--out", sub.to_str().unwrap()]);
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        run_ok(&[
            "build-random", "--subspace", sub.to_str().unwrap(), "--alpha", "0.5", "-t", "500",
            "--seed", "1", "--out", out.to_str().unwrap(),
        ]);
    }
    assert_eq!(read(&a), read(&b));
}

#[test]
fn verify_unreachable_alpha_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let sub = dir.path().join("sub.json");
    let k = dir.path().join("k.json");
    run_ok(&["subspace", "--family", "full", "--n", "2", "--d", "1", "--out", sub.to_str().unwrap()]);
    run_ok(&[
        "build-random", "--subspace", sub.to_str().unwrap(), "--alpha", "0.5", "-t", "50",
        "--seed", "4", "--out", k.to_str().unwrap(),
    ]);
    let out = bin()
        .args([
            "verify", "--body", sub.to_str().unwrap(), "--polytope", k.to_str().unwrap(),
            "--directions", "300", "--oracle", "eigen", "--alpha", "0.999999",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn ngon_reports_extreme_points() {
    let out = bin().args(["ngon", "--n", "7"]).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("extreme points = 7"), "{stdout}");
}

#[test]
fn validation_error_exits_one() {
    let out = bin()
        .args(["subspace", "--family", "nonsense", "--n", "3", "--out", "/dev/null"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
