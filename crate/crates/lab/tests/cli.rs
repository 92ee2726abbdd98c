use std::path::Path;
use std::process::Command;

use bfamily_lab::manifest::{AnalyzeSpec, RunManifest};
use bfamily_lab::runner::{analyze_file, execute};
use bfamily_lab::snapshot::Snapshot;

fn manifest(text: &str, out: &Path) -> RunManifest {
    let mut m = RunManifest::from_toml(text).unwrap();
    m.out = out.to_path_buf();
    m
}

const SIMULATE: &str = r#"
kind = "simulate"
b = 2.0
out = "unused"
[grid]
half_length = 40.0
num_points = 512
[solver]
t_end = 0.0
[initial.profile]
name = "positive_momentum"
amplitude = 0.5
width = 1.0
"#;

const SWEEP: &str = r#"
kind = "sweep"
name = "comb"
b = -2.0
out = "unused"
[grid]
half_length = 40.0
num_points = 16384
[solver]
t_end = 0.05
cadence = 40.0
[initial.inflation]
n = 4
q = "inf"
[sweep]
base = "inflate"
parameter = "n"
values = [4, 6, 8]
"#;

#[test]
fn zero_time_run_writes_a_single_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = execute(&manifest(SIMULATE, dir.path()), 1).unwrap();
    assert_eq!(out.len(), 1);
    let csv = std::fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    for f in ["manifest.toml", "monitors.csv", "final.bfsn", "summary.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let snap = Snapshot::read(&dir.path().join("final.bfsn")).unwrap();
    assert_eq!(snap.samples.len(), 512);
    assert_eq!(snap.t, 0.0);
}

#[test]
fn manifest_echo_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(&SIMULATE.replace("t_end = 0.0", "t_end = 0.3"), &dir.path().join("a"));
    execute(&m, 1).unwrap();
    let echo = std::fs::read_to_string(dir.path().join("a/manifest.toml")).unwrap();
    let again = manifest(&echo, &dir.path().join("b"));
    execute(&again, 1).unwrap();
    for f in ["diagnostics.csv", "monitors.csv", "final.bfsn"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn sweep_writes_one_directory_per_value_and_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = execute(&manifest(SWEEP, dir.path()), 3).unwrap();
    assert_eq!(out.len(), 3);
    for n in [4, 6, 8] {
        let d = dir.path().join(format!("n_{n}"));
        for f in ["manifest.toml", "diagnostics.csv", "series.csv", "report.json", "final.bfsn"] {
            assert!(d.join(f).exists(), "n = {n}: {f}");
        }
    }
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
    assert!(summary.lines().nth(1).unwrap().starts_with("comb_n_4,n,4,completed"));
}

#[test]
fn analyze_recovers_the_logged_initial_norm() {
    let dir = tempfile::tempdir().unwrap();
    let text = SWEEP
        .replace("kind = \"sweep\"", "kind = \"inflate\"")
        .replace("num_points = 16384", "num_points = 65536")
        .replace("n = 4", "n = 10")
        .replace("t_end = 0.05", "t_end = 0.0");
    let text = &text[..text.find("[sweep]").unwrap()];
    execute(&manifest(text, dir.path()), 1).unwrap();
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let logged = report["summary"]["initial_besov"].as_f64().unwrap();
    let table = analyze_file(&dir.path().join("final.bfsn"), &AnalyzeSpec { s: vec![1.5], q: vec![f64::INFINITY] }).unwrap();
    let line = table.lines().find(|l| l.starts_with("B^1.5_{2,inf}")).unwrap();
    let value: f64 = line.split_whitespace().last().unwrap().parse().unwrap();
    assert!((value - logged).abs() <= 1e-10, "{value} vs {logged}");
    assert!((logged * 10f64.ln() - 1.0).abs() < 1e-12);
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bfamily"))
}

#[test]
fn exit_codes_separate_outcomes_from_failures() {
    let dir = tempfile::tempdir().unwrap();
    let ok = dir.path().join("ok.toml");
    std::fs::write(&ok, SIMULATE.replace("t_end = 0.0", "t_end = 0.1")).unwrap();
    let status = bin()
        .args(["simulate", "--manifest"])
        .arg(&ok)
        .arg("--out")
        .arg(dir.path().join("run"))
        .arg("--cadence")
        .arg("20")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let rows = std::fs::read_to_string(dir.path().join("run/diagnostics.csv")).unwrap();
    assert_eq!(rows.lines().count(), 4);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, format!("viscosity = 1.0\n{SIMULATE}")).unwrap();
    let out = bin().args(["simulate", "--manifest"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("viscosity"));

    let out = bin().args(["analyze"]).arg(dir.path().join("missing.bfsn")).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn breaking_is_a_successful_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
kind = "simulate"
b = 3.0
out = "unused"
[grid]
half_length = 40.0
num_points = 8192
[solver]
t_end = 20.0
blowup_slope_threshold = 10.0
[initial.profile]
name = "momentum_pair"
left = 2.0
right = -2.0
separation = 2.0
width = 0.7
"#;
    let path = dir.path().join("m.toml");
    std::fs::write(&path, text).unwrap();
    let out = bin()
        .args(["simulate", "--manifest"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("run"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("blowup_detected"));
}

#[test]
fn shipped_manifests_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../manifests");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let m = bfamily_lab::manifest::parse_manifest(&path).unwrap();
        m.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        seen += 1;
    }
    assert!(seen >= 3);
}
