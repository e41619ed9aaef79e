use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn limcyc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_limcyc")).args(args).current_dir(dir).output().expect("binary runs")
}

fn with_config(cmd: &[&str], config: &str) -> (tempfile::TempDir, Output) {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.json"), config).unwrap();
    let mut args = cmd.to_vec();
    args.extend(["--config", "run.json", "--out", "out"]);
    let out = limcyc(&args, dir.path());
    (dir, out)
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn last_row(csv_path: &Path) -> Vec<f64> {
    let text = fs::read_to_string(csv_path).unwrap();
    text.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect()
}

#[test]
fn harmonic_orbit_closes() {
    let cfg = r#"{"system": {"kind": "poly", "p": [[0, 1, 1.0]], "q": [[1, 0, -1.0]]},
                  "integrate": {"init": [0.0, 1.0], "t_end": 6.283185307179586}}"#;
    let (dir, out) = with_config(&["integrate"], cfg);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let row = last_row(&dir.path().join("out/trajectory.csv"));
    assert!((row[1] - 0.0).abs() < 1e-8 && (row[2] - 1.0).abs() < 1e-8, "{row:?}");
}

#[test]
fn slow_fast_runs_to_time_limit() {
    let cfg = r#"{"system": {"kind": "slow_fast", "params": {"a": 0.5, "eps": 0.1}}, "integrate": {"t_end": 300}}"#;
    let (dir, out) = with_config(&["integrate"], cfg);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("TimeLimit"));
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/integrate.json")).unwrap()).unwrap();
    assert_eq!(summary["termination"], "TimeLimit");
}

#[test]
fn malformed_json_is_a_config_error() {
    let (_dir, out) = with_config(&["integrate"], r#"{"system": "#);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("configuration error"));
}

#[test]
fn unknown_keys_and_missing_system_exit_2() {
    let (_d, out) = with_config(&["retmap"], r#"{"integrator": {"rtol": 1e-9, "tol": 1}}"#);
    assert_eq!(code(&out), 2);
    let (_d, out) = with_config(&["cycles"], "{}");
    assert_eq!(code(&out), 2);
    let (_d, out) =
        with_config(&["integrate"], r#"{"system": {"kind": "slow_fast", "params": {"a": 0.5, "eps": -1}}}"#);
    assert_eq!(code(&out), 2);
}

#[test]
fn quintic_has_one_cycle() {
    let cfg = r#"{"system": {"kind": "quintic", "params": {"a": 0, "b": 1, "c": -1}}}"#;
    let (dir, out) = with_config(&["cycles"], cfg);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/cycles.json")).unwrap()).unwrap();
    let cycles = v["cycles"].as_array().unwrap();
    assert_eq!(cycles.len(), 1);
    for key in ["y0", "period", "multiplier", "class", "orientation", "min_y"] {
        assert!(cycles[0].get(key).is_some(), "missing {key}");
    }
    assert!(dir.path().join("out/cycle_0.csv").exists());
}

#[test]
fn slow_fast_truth_table_exits_0() {
    let cfg = r#"{"prop3": {"eps": 0.1, "a_list": [0, -0.5, 0.5, -1.2, 1.2]}}"#;
    let (dir, out) = with_config(&["verify", "prop3"], cfg);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(report["proposition"], "P3");
    assert!(dir.path().join("out/summary.txt").exists());
}

#[test]
fn phi_with_same_sign_node_exits_2() {
    let (_d, out) = with_config(&["phi"], r#"{"phi": {"b_grid": [1.0], "c_grid": [-1.0, 1.0]}}"#);
    assert_eq!(code(&out), 2);
}

#[test]
fn echoed_config_reproduces_outputs() {
    let cfg = r#"{"system": {"kind": "quintic", "params": {"a": 0, "b": 1, "c": -1}}, "retmap": {"y_min": 0.2, "y_max": 2, "n": 12}}"#;
    let (dir, out) = with_config(&["retmap"], cfg);
    assert_eq!(code(&out), 0);
    let again = limcyc(&["retmap", "--config", "out/config.json", "--out", "again"], dir.path());
    assert_eq!(code(&again), 0);
    for f in ["retmap.csv", "config.json"] {
        assert_eq!(
            fs::read(dir.path().join("out").join(f)).unwrap(),
            fs::read(dir.path().join("again").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn seed_flag_is_echoed_and_nothing_escapes_out_dir() {
    let cfg = r#"{"prop1": {"samples": 2, "n": 12}}"#;
    let (dir, out) = with_config(&["verify", "prop1", "--seed", "17", "--threads", "1"], cfg);
    assert!(code(&out) <= 1);
    let echo: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/config.json")).unwrap()).unwrap();
    assert_eq!(echo["prop1"]["seed"], 17);
    let mut top: Vec<String> =
        fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    top.sort();
    assert_eq!(top, ["out", "run.json"]);
}

#[test]
fn sweep_needs_a_rotated_family() {
    let (_d, out) = with_config(&["sweep"], r#"{"system": {"kind": "slow_fast", "params": {"a": 0.5}}}"#);
    assert_eq!(code(&out), 2);
}
