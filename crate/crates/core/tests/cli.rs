use std::path::Path;
use std::process::{Command, Output};

use cauchyquad::io::import_rule;
use serde_json::Value;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cauchyquad")).args(args).output().expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.display().to_string()
}

#[test]
fn gauss_run_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&["gauss", "--degree", "20", "--sweep", "10:4:22", "--portrait", "32x24", "--out", &out_arg(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["rule.csv", "rule.json", "sweep.csv", "portrait.ppm", "run.json"] {
        assert!(dir.path().join(name).is_file(), "missing {name}");
    }
    let rule = import_rule(&dir.path().join("rule.csv")).unwrap();
    assert_eq!(rule.nodes.len(), 20);

    let run: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(run["tool"], "cauchyquad");
    assert_eq!(run["metrics"]["degree"], 20);
    assert!(run["metrics"]["error"].as_f64().unwrap() < 1e-3);
    assert_eq!(run["options"]["degree"], 20);

    let sweep = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = sweep.lines();
    assert_eq!(lines.next(), Some("degree,error,baseline_error"));
    assert_eq!(lines.count(), 4);

    let ppm = std::fs::read(dir.path().join("portrait.ppm")).unwrap();
    assert!(ppm.starts_with(b"P6\n32 24\n255\n"));
    assert_eq!(ppm.len(), b"P6\n32 24\n255\n".len() + 32 * 24 * 3);
}

#[test]
fn runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = cli(&["hankel", "--sweep", "--portrait", "16x16", "--out", &out_arg(d.path())]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["rule.csv", "rule.json", "sweep.csv", "portrait.ppm", "run.json"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap(), "{name} differs");
    }
}

#[test]
fn approximation_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    // 200 samples cannot support a degree-150 least-squares fit.
    let out = cli(&["gauss", "--degree", "150", "--out", &out_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
    assert!(!dir.path().join("rule.csv").exists());

    let out = cli(&["gauss", "--damping", "1.5", "--out", &out_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let out = cli(&["circle", "--integrand", "runge20", "--out", &out_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn io_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let out = cli(&["gauss", "--out", &out_arg(&blocker.join("sub"))]);
    assert_eq!(out.status.code(), Some(3));

    let out = cli(&["custom", "--seed-geometry", &out_arg(&dir.path().join("missing.json"))]);
    assert_eq!(out.status.code(), Some(3));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"pieces\": [ { \"type\": \"blob\" } ]\n}\n").unwrap();
    let out = cli(&["custom", "--seed-geometry", &out_arg(&bad), "--out", &out_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.json:"));
}

#[test]
fn failed_write_leaves_no_partial_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    // A directory where rule.json should go makes the second write fail.
    std::fs::create_dir(dir.path().join("rule.json")).unwrap();
    let out = cli(&["gauss", "--out", &out_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!dir.path().join("rule.csv").exists());
    assert!(!dir.path().join("run.json").exists());
}

#[test]
fn custom_recipe_from_geometry_file() {
    let dir = tempfile::tempdir().unwrap();
    let geometry = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/custom_chebyshev.json");
    let out = cli(&["custom", "--seed-geometry", &out_arg(&geometry), "--integrand", "runge20", "--out", &out_arg(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    // int (1 - x^2)^(-1/2) / (1 + 20 x^2) dx = pi / sqrt(21).
    let exact = std::f64::consts::PI / 21f64.sqrt();
    let value = run["metrics"]["integral"][0].as_f64().unwrap();
    assert!((value - exact).abs() < 1e-8, "{value} vs {exact}");
}

#[test]
fn help_and_bad_arguments() {
    let out = cli(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for flag in ["--degree", "--tol", "--lawson", "--damping", "--sign", "--sweep", "--out", "--portrait", "--seed-geometry"] {
        assert!(text.contains(flag), "help lacks {flag}");
    }
    assert!(!cli(&["no-such-recipe"]).status.success());
    assert!(!cli(&["gauss", "--degree", "10", "--tol", "1e-6"]).status.success());
}
