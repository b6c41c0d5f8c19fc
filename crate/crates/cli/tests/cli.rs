use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use windshape::pipeline::{read_margin_map, write_margin_map, Aggregate, ControllerFile, SweepReport, SynthesisReport};
use windshape::sim::io::{read_json, read_switches, read_trace, write_json, write_switches, write_trace};
use windshape::sim::{Metrics, SimTrace};

fn repo_configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn copy_dir(from: &Path, to: &Path) {
    std::fs::create_dir_all(to).unwrap();
    for entry in std::fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            std::fs::copy(entry.path(), target).unwrap();
        }
    }
}

/// Copy of the shipped configs with a reduced run file.
fn workspace(run_toml: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    copy_dir(&repo_configs(), &dir.path().join("configs"));
    std::fs::write(dir.path().join("configs/run.toml"), run_toml).unwrap();
    dir
}

fn windshape(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_windshape"))
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .args(args)
        .output()
        .unwrap()
}

const SMALL_RUN: &str = r#"
command = "all"
out = "../out"
seeds = [0, 1, 2, 3, 4]
turbine = "turbine.toml"
weights = "weights.toml"
scenarios = ["short.toml"]

[sweep]
nv = 4
np = 3
"#;

const SHORT_SCENARIO: &str = r#"
name = "short"
duration = 20.0
p_ref = 2.0e6

[wind]
mean_speed = 12.0
turbulence_intensity = 0.05
"#;

fn assert_json_round_trip<T: serde::Serialize + for<'de> serde::Deserialize<'de>>(path: &Path, scratch: &Path) {
    let value: T = read_json(path).unwrap();
    write_json(scratch, &value).unwrap();
    assert_eq!(std::fs::read(path).unwrap(), std::fs::read(scratch).unwrap(), "{}", path.display());
}

#[test]
fn full_run_writes_readable_artifacts() {
    let dir = workspace(SMALL_RUN);
    std::fs::write(dir.path().join("configs/short.toml"), SHORT_SCENARIO).unwrap();
    let out = windshape(dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let root = dir.path().join("out");
    let scratch = dir.path().join("scratch");
    std::fs::create_dir_all(&scratch).unwrap();
    assert_json_round_trip::<ControllerFile>(&root.join("controllers/k2.json"), &scratch.join("a.json"));
    assert_json_round_trip::<ControllerFile>(&root.join("controllers/k3.json"), &scratch.join("b.json"));
    assert_json_round_trip::<SynthesisReport>(&root.join("synthesis_report.json"), &scratch.join("c.json"));
    assert_json_round_trip::<SweepReport>(&root.join("sweep_summary.json"), &scratch.join("d.json"));

    let map = root.join("margin_map.csv");
    let rows = read_margin_map(&map).unwrap();
    assert_eq!(rows.len(), 12);
    let k2: Vec<_> = rows.iter().map(|r| r.k2).collect();
    let k3: Vec<_> = rows.iter().map(|r| r.k3).collect();
    write_margin_map(&scratch.join("map.csv"), &k2, &k3).unwrap();
    assert_eq!(std::fs::read(&map).unwrap(), std::fs::read(scratch.join("map.csv")).unwrap());

    let sim = root.join("sim/short");
    let mut traces = 0;
    for seed in 0..5 {
        let seed_dir = sim.join(format!("seed_{seed}"));
        let records = read_trace(&seed_dir.join("trace.csv")).unwrap();
        assert_eq!(records.len(), 5001);
        let trace = SimTrace { records, switches: vec![], fault: None, dt: 0.004 };
        write_trace(&scratch.join("t.csv"), &trace).unwrap();
        assert_eq!(std::fs::read(seed_dir.join("trace.csv")).unwrap(), std::fs::read(scratch.join("t.csv")).unwrap());
        let switches = read_switches(&seed_dir.join("switches.csv")).unwrap();
        write_switches(&scratch.join("s.csv"), &switches).unwrap();
        assert_eq!(std::fs::read(seed_dir.join("switches.csv")).unwrap(), std::fs::read(scratch.join("s.csv")).unwrap());
        assert_json_round_trip::<Metrics>(&seed_dir.join("metrics.json"), &scratch.join("m.json"));
        traces += 1;
    }
    assert_eq!(traces, 5);
    let entries: Vec<_> = std::fs::read_dir(&sim).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(entries.len(), 6);
    assert_json_round_trip::<Aggregate>(&sim.join("aggregate_metrics.json"), &scratch.join("agg.json"));
    let agg: Aggregate = read_json(&sim.join("aggregate_metrics.json")).unwrap();
    assert_eq!(agg.succeeded, 5);
}

#[test]
fn corrupt_weights_exit_with_location() {
    let dir = workspace(SMALL_RUN);
    let weights = dir.path().join("configs/weights.toml");
    let text = std::fs::read_to_string(&weights).unwrap();
    std::fs::write(&weights, text.replacen("design_speed = 7.5", "design_speed = = 7.5", 1)).unwrap();
    let out = windshape(dir.path(), &["--command", "synthesize"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("weights.toml:"), "{err}");
    let line = text.lines().position(|l| l.starts_with("design_speed = 7.5")).unwrap() + 1;
    assert!(err.contains(&format!("weights.toml:{line}:")), "{err}");
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = workspace(SMALL_RUN);
    assert_eq!(windshape(dir.path(), &["--no-such-flag"]).status.code(), Some(2));
    assert_eq!(windshape(dir.path(), &["--config", "missing.toml"]).status.code(), Some(2));
    assert_eq!(windshape(dir.path(), &["--command", "dance"]).status.code(), Some(2));
    assert_eq!(windshape(dir.path(), &["--gamma-factor", "0.5", "--command", "synthesize"]).status.code(), Some(2));
}

#[test]
fn synthesize_only_writes_controllers() {
    let dir = workspace(SMALL_RUN);
    std::fs::write(dir.path().join("configs/short.toml"), SHORT_SCENARIO).unwrap();
    let out = windshape(dir.path(), &["--command", "synthesize", "--out", "alt"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let root = dir.path().join("alt");
    assert!(root.join("controllers/k2.json").is_file());
    assert!(root.join("synthesis_report.json").is_file());
    assert!(!root.join("margin_map.csv").exists());
    assert!(!root.join("sim").exists());
}
