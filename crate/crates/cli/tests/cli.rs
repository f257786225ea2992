use std::path::{Path, PathBuf};
use std::process::Command;

use freelab_cli::config::{Experiment, ExperimentConfig};
use freelab_cli::RunReport;

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn freelab(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_freelab")).args(args).env("FREELAB_OUT_DIR", out).output().expect("binary runs")
}

fn report_without_timings(dir: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("report.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v.as_object_mut().unwrap().remove("timings");
    v
}

#[test]
fn every_example_config_passes_and_is_deterministic() {
    for kind in ["fock", "freeness", "modular", "spectral", "smatrix"] {
        let config = configs_dir().join(format!("{kind}.toml"));
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let first = freelab(&["run", config.to_str().unwrap()], a.path());
        assert_eq!(first.status.code(), Some(0), "{kind}: {}", String::from_utf8_lossy(&first.stderr));
        let second = freelab(&["run", config.to_str().unwrap()], b.path());
        assert_eq!(second.status.code(), Some(0));
        assert_eq!(report_without_timings(a.path()), report_without_timings(b.path()), "{kind}");
    }
}

#[test]
fn config_echo_round_trips() {
    for kind in ["fock", "freeness", "modular", "spectral", "smatrix"] {
        let path = configs_dir().join(format!("{kind}.toml"));
        let config = ExperimentConfig::load(&path).unwrap();
        let out = tempfile::tempdir().unwrap();
        let status = freelab(&["run", path.to_str().unwrap(), "--seed", "99"], out.path()).status;
        assert_eq!(status.code(), Some(0));
        let report = RunReport::load(&out.path().join("report.json")).unwrap();
        let echoed = ExperimentConfig::from_toml(&report.config.to_toml().unwrap(), &path).unwrap();
        assert_eq!(echoed, report.config);
        assert_eq!(echoed.seed, 99);
        assert_eq!(echoed.experiment.kind(), config.experiment.kind());
    }
}

#[test]
fn seed_changes_the_report() {
    let config = configs_dir().join("freeness.toml");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    freelab(&["run", config.to_str().unwrap(), "--seed", "1"], a.path());
    freelab(&["run", config.to_str().unwrap(), "--seed", "2"], b.path());
    assert_ne!(report_without_timings(a.path()), report_without_timings(b.path()));
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "version = 1\nseed = 1\n[experiment]\nkind = \"freeness\"\ntrails = 10\n").unwrap();
    let out = freelab(&["run", path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trails"));

    std::fs::write(&path, "version = 2\nseed = 1\n[experiment]\nkind = \"fock\"\n").unwrap();
    let out = freelab(&["run", path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("version"));

    std::fs::write(&path, "version = 1\nseed = 1\n[experiment]\nkind = \"spectral\"\n[[experiment.seeds]]\nlabel = 1\ncsv = \"missing.csv\"\n").unwrap();
    let out = freelab(&["run", path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tightened_tolerance_fails_with_status_one() {
    let config = configs_dir().join("fock.toml");
    let out = tempfile::tempdir().unwrap();
    let res = freelab(&["run", config.to_str().unwrap(), "--tol-scale", "1e-9"], out.path());
    assert_eq!(res.status.code(), Some(1));
    let report = RunReport::load(&out.path().join("report.json")).unwrap();
    assert!(!report.passed);
}

#[test]
fn divergent_bound_is_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("low.toml");
    std::fs::write(
        &path,
        "version = 1\nseed = 1\n[experiment]\nkind = \"spectral\"\ns = 0.5\nmax_len = 4\n\
         [[experiment.seeds]]\nlabel = 1\ngeometric = 50\n[[experiment.seeds]]\nlabel = 2\ngeometric = 50\n",
    )
    .unwrap();
    let out = freelab(&["run", path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not conclusive"));
    let report = RunReport::load(&dir.path().join("report.json")).unwrap();
    assert!(!report.conclusive);
    assert!(matches!(report.config.experiment, Experiment::Spectral(_)));
}

#[test]
fn emit_writes_documented_columns() {
    let cases = [
        ("spectral", "trace", "max_len,truncated_trace,bound"),
        ("modular", "gamma_decay", "n,word,sup_entry"),
        ("smatrix", "amplitude", "theta1,theta2,re,im"),
    ];
    for (kind, series, header) in cases {
        let config = configs_dir().join(format!("{kind}.toml"));
        let out = tempfile::tempdir().unwrap();
        freelab(&["run", config.to_str().unwrap()], out.path());
        let report = out.path().join("report.json");
        let res = freelab(&["emit", report.to_str().unwrap(), series], out.path());
        assert_eq!(res.status.code(), Some(0));
        let csv_path = PathBuf::from(String::from_utf8(res.stdout).unwrap().trim());
        let text = std::fs::read_to_string(csv_path).unwrap();
        assert_eq!(text.lines().next(), Some(header));
        assert!(text.lines().count() > 1);
        let missing = freelab(&["emit", report.to_str().unwrap(), "no_such_series"], out.path());
        assert_eq!(missing.status.code(), Some(2));
    }
}
