mod common;

use std::process::{Command, Output};

use common::*;

fn monetif(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monetif")).args(args).output().unwrap()
}

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_then_fit_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = monetif(&["simulate", "--seed", "5", "--out", path(dir.path())]);
    assert!(out.status.success());
    let data = dir.path().join("dataset.csv");
    assert!(data.is_file());
    let fit = monetif(&["fit", "--data", path(&data), "--model", "model3"]);
    assert!(fit.status.success(), "{}", String::from_utf8_lossy(&fit.stderr));
    let text = String::from_utf8(fit.stdout).unwrap();
    assert!(text.contains("Real rate × QE"));
    let direct = monetif(&["fit", "--seed", "5", "--model", "model3"]);
    assert_eq!(String::from_utf8(direct.stdout).unwrap(), text);
}

#[test]
fn ingest_writes_dataset_and_log() {
    let dir = tempfile::tempdir().unwrap();
    let fred = write_fred(dir.path());
    let wb = write_worldbank(dir.path());
    let out_dir = dir.path().join("out");
    let out = monetif(&["ingest", "--fred", path(&fred), "--worldbank", path(&wb), "--out", path(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let log = std::fs::read_to_string(out_dir.join("data_source_log.txt")).unwrap();
    assert!(log.contains("FRED") && log.contains("WorldBank") && log.contains("imputed"));
    let ds = std::fs::read_to_string(out_dir.join("dataset.csv")).unwrap();
    assert_eq!(ds.lines().count(), 53);
}

#[test]
fn diagnose_and_chow_print_tables() {
    let d = monetif(&["diagnose", "--seed", "2", "--format", "csv"]);
    assert!(d.status.success());
    let text = String::from_utf8(d.stdout).unwrap();
    assert!(text.starts_with("section,row,column,field,value"));
    assert!(text.contains("Breusch-Godfrey (2 lags)"));
    let c = monetif(&["chow", "--seed", "2", "--breakpoint", "2001", "--format", "json"]);
    assert!(c.status.success());
    let v: serde_json::Value = serde_json::from_slice(&c.stdout).unwrap();
    assert_eq!(v["id"], "t05_chow");
}

#[test]
fn report_with_alt_rate_and_formats() {
    let dir = tempfile::tempdir().unwrap();
    let alt = write_alt(dir.path(), "m2_growth");
    let out_dir = dir.path().join("out");
    let out = monetif(&["report", "--alt-rate", path(&alt), "--format", "csv", "--out", path(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t08 = std::fs::read_to_string(out_dir.join("t08_robustness.csv")).unwrap();
    assert!(t08.contains("m2_growth"));
    assert!(out_dir.join("t02_descriptives.csv").is_file());
}

#[test]
fn sweep_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = monetif(&["sweep", "--seeds", "0..4", "--out", path(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep_summary.json")).unwrap()).unwrap();
    assert_eq!(v["completed"], 4);
    assert!(String::from_utf8(out.stdout).unwrap().contains("4 completed, 0 failed"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(monetif(&["report", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(monetif(&["sweep"]).status.code(), Some(2));
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, "{ not json").unwrap();
    assert_eq!(monetif(&["report", "--config", path(&cfg)]).status.code(), Some(2));
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "year,value\n1975,abc\n").unwrap();
    let out = monetif(&["ingest", "--worldbank", path(&bad), "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    // a period with fewer observations than coefficients
    std::fs::write(
        &cfg,
        r#"{"partition": {"segments": [
            {"label": "a", "start": 1975, "end": 2024},
            {"label": "b", "start": 2025, "end": 2026}]}}"#,
    )
    .unwrap();
    let out = monetif(&["report", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}
