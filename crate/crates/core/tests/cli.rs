use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], config: &str, dir: &Path) -> Output {
    let cfg = dir.join("config.json");
    fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    Command::new(env!("CARGO_BIN_EXE_orbifold-yamabe"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out/report.json")).unwrap()).unwrap()
}

#[test]
fn classify_reports_minus_side() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"experiment": "classify", "geometry": {"kind": "lebrun_compact", "n_or_gamma": 3}}"#;
    let out = run(&["classify"], cfg, dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rep = report(dir.path());
    assert_eq!(rep["results"]["label"], "Minus");
    assert_eq!(rep["results"]["margin"], -1.0);
    let csv = fs::read_to_string(dir.path().join("out/classify.csv")).unwrap();
    assert_eq!(csv, "label,margin\nMinus,-1\n");
}

#[test]
fn football_solve_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"experiment": "solve", "geometry": {"kind": "football", "n_or_gamma": 2},
                  "k_family": {"kind": "constant", "value": 2.0}}"#;
    let out = run(&["run"], cfg, dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("out/solution.csv").exists());
}

#[test]
fn bad_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = r#"{"experiment": "classify", "geometry": {"kind": "lebrun_compact", "n_or_gamma": 3}, "colour": 1}"#;
    let out = run(&["run"], unknown, dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(err["kind"], "config");

    let mismatch = r#"{"experiment": "classify", "geometry": {"kind": "lebrun_compact", "n_or_gamma": 3}}"#;
    let out = run(&["sweep"], mismatch, dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(dir.path().join("out/error.json").exists());

    let zero_order = r#"{"experiment": "curvature", "geometry": {"kind": "lebrun_compact", "n_or_gamma": 0}}"#;
    assert_eq!(run(&["run"], zero_order, dir.path()).status.code(), Some(2));
}

#[test]
fn failed_sweep_rows_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"experiment": "sweep", "geometry": {"kind": "lebrun_compact", "n_or_gamma": 3},
                  "sweep": {"parameter": "bump_amplitude", "values": [-1.5, 0.5]}}"#;
    let out = run(&["sweep"], cfg, dir.path());
    assert_eq!(out.status.code(), Some(3));
    let csv = fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn empty_sweep_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"experiment": "sweep", "geometry": {"kind": "lebrun_compact", "n_or_gamma": 3},
                  "sweep": {"parameter": "bump_amplitude", "values": []}}"#;
    let out = run(&["sweep"], cfg, dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    assert_eq!(csv, "parameter,margin,label,count,max_u,residual_sup,brackets,error\n");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let cfg = r#"{"experiment": "count", "geometry": {"kind": "lebrun_compact", "n_or_gamma": 2},
                  "k_family": {"kind": "bump", "base": 1.0, "amplitude": -0.5}}"#;
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(run(&["count"], cfg, a.path()).status.code(), Some(0));
    assert_eq!(run(&["count", "--threads", "2"], cfg, b.path()).status.code(), Some(0));
    for name in ["scan.csv"] {
        let x = fs::read(a.path().join("out").join(name)).unwrap();
        let y = fs::read(b.path().join("out").join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
    }
    assert_eq!(report(a.path())["results"], report(b.path())["results"]);
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let cfg = orbifold_yamabe::experiment::ExperimentConfig::from_path(&path)
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 10);
}
