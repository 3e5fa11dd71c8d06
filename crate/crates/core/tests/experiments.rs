use std::path::{Path, PathBuf};
use std::process::Command;

use cat0_rigidity::config::{ExperimentConfig, ExperimentKind};
use cat0_rigidity::exec::Exec;
use cat0_rigidity::experiments::{run, SCAN_DISCLAIMER};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cat0-rigidity-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_cat0-rigidity")).args(args).output().unwrap()
}

#[test]
fn shipped_configs_parse_and_validate() {
    let mut n = 0;
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            cfg.validate().unwrap();
            n += 1;
        }
    }
    assert!(n >= 7);
}

#[test]
fn sanity_mode_passes_every_check() {
    let mut cfg = ExperimentConfig::load(&configs().join("bowers_ruane_sanity.toml")).unwrap();
    cfg.apply_overrides(Some(6), Some(60), None).unwrap();
    let report = run(&cfg, Exec::Parallel).unwrap();
    for c in &report.checks {
        assert!(c.passed, "{}: {}", c.name, c.detail);
    }
    assert!(report.find_check("star_holds").is_some());
}

#[test]
fn lattice_family_passes() {
    let cfg = ExperimentConfig::load(&configs().join("rigid_lattice.toml")).unwrap();
    let report = run(&cfg, Exec::Sequential).unwrap();
    assert!(report.checks.iter().all(|c| c.passed), "{}", report.summary());
    assert!(report.invariant_violations().is_empty());
}

#[test]
fn conjecture_scan_carries_disclaimer() {
    let cfg = ExperimentConfig::load(&configs().join("conjecture_scan.toml")).unwrap();
    assert_eq!(cfg.experiment, ExperimentKind::ConjectureScan);
    let report = run(&cfg, Exec::Parallel).unwrap();
    assert_eq!(report.results["disclaimer"], SCAN_DISCLAIMER);
    assert!(report.table("spectrum").is_some());
}

#[test]
fn report_writes_json_and_csv() {
    let mut cfg = ExperimentConfig::load(&configs().join("conjecture_scan.toml")).unwrap();
    let dir = scratch("report");
    cfg.out = dir.clone();
    let report = run(&cfg, Exec::Parallel).unwrap();
    let files = report.write(&dir).unwrap();
    assert_eq!(files.len(), 1 + report.tables.len());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&files[0]).unwrap()).unwrap();
    assert_eq!(json["experiment"], "conjecture_scan");
    for f in &files[1..] {
        let mut r = csv::Reader::from_path(f).unwrap();
        assert!(r.headers().unwrap().len() > 1);
        assert!(r.records().count() > 0);
    }
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn cli_runs_and_writes_output() {
    let dir = scratch("cli");
    let cfg = configs().join("conjecture_scan.toml");
    let out = cli(&["conjecture-scan", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap(), "--sequential"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("conjecture_scan"));
    assert!(dir.join("conjecture_scan.json").exists());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn cli_rejects_bad_configs() {
    let cfg = configs().join("conjecture_scan.toml");
    let mismatch = cli(&["example-6-1", "--config", cfg.to_str().unwrap()]);
    assert_eq!(mismatch.status.code(), Some(2));

    let dir = scratch("bad");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.toml");
    std::fs::write(&bad, "experiment = \"example_6_1\"\n[horizons]\nsequence = 0\n").unwrap();
    let zero = cli(&["example-6-1", "--config", bad.to_str().unwrap()]);
    assert_eq!(zero.status.code(), Some(2));
    let missing = cli(&["example-6-1", "--config", dir.join("none.toml").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
    std::fs::remove_dir_all(dir).unwrap();
}
