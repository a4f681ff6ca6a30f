use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn supercool(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_supercool"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("scenario.json");
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

const UNIFORM: &str = r#"{
  "id": "uniform",
  "density": {"family": "piecewise", "breaks": [0, 2], "values": [0.5]},
  "alpha": 1, "dt": 0.005, "dx": 0.02, "x_max": 7, "t_end": 0.5
}"#;

#[test]
fn simulate_writes_artifacts_and_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), UNIFORM);
    let out = tmp.path().join("runs");
    let o = supercool(&["simulate", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = out.join("uniform");
    for f in ["frontier.csv", "field.csv", "nu.csv", "w.csv", "profile.csv", "jumps.json", "summary.json"] {
        assert!(dir.join(f).is_file(), "missing {f}");
    }
    let v = supercool(&["verify", dir.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(0));
}

#[test]
fn identical_configs_give_identical_summaries() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), UNIFORM);
    let mut summaries = Vec::new();
    let out = tmp.path().join("runs");
    for _ in 0..2 {
        let o = supercool(&["simulate", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        summaries.push(fs::read(out.join("uniform/summary.json")).unwrap());
    }
    assert_eq!(summaries[0], summaries[1]);
}

#[test]
fn config_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), UNIFORM);
    let out = tmp.path().join("runs");
    let short = supercool(&["simulate", &cfg, "--set", "x_max=0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(short.status.code(), Some(2));
    let unknown = supercool(&["simulate", &cfg, "--set", "no_such_key=1"]);
    assert_eq!(unknown.status.code(), Some(2));
    let missing = supercool(&["verify", tmp.path().join("absent").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn compare_rejects_different_scenarios() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), UNIFORM);
    let out = tmp.path().join("runs");
    let out_s = out.to_str().unwrap();
    assert_eq!(supercool(&["simulate", &cfg, "--out", out_s]).status.code(), Some(0));
    let other = supercool(&["simulate", &cfg, "--out", out_s, "--set", "id=other", "--set", "alpha=0.8"]);
    assert_eq!(other.status.code(), Some(0));
    let same = supercool(&["compare", &format!("{out_s}/uniform"), &format!("{out_s}/uniform")]);
    assert_eq!(same.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&same.stdout).unwrap();
    assert_eq!(report["sup"], 0.0);
    let diff = supercool(&["compare", &format!("{out_s}/uniform"), &format!("{out_s}/other")]);
    assert_eq!(diff.status.code(), Some(2));
}

#[test]
fn sweep_runs_each_value() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), UNIFORM);
    let out = tmp.path().join("runs");
    let o = supercool(&[
        "sweep", &cfg, "--param", "alpha", "--values", "0.8,1.2", "--jobs", "2", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("uniform-alpha-0.8/summary.json").is_file());
    assert!(out.join("uniform-alpha-1.2/summary.json").is_file());
}
