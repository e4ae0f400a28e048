use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn elastic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elastic")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, value.to_string()).unwrap();
    path
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn two_cloud_params() -> Value {
    json!({"masses": ["1", "1", "1"], "left_rates": ["1", "1", "1"], "right_rates": ["1", "2", "1/3"]})
}

#[test]
fn analyze_two_cloud_example() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", &json!({ "params": two_cloud_params() }));
    let report = stdout_json(&elastic(&["analyze", "--config", cfg.to_str().unwrap()]));
    assert_eq!(report["clouds"], json!([[1, 1], [2, 3]]));
    assert_eq!(report["speeds"], json!(["0", "1/6"]));
    assert_eq!(report["stable"], json!(false));
}

#[test]
fn analyze_stable_pair() {
    let dir = TempDir::new().unwrap();
    let params = json!({"masses": ["1", "1"], "left_rates": ["0", "1"], "right_rates": ["1", "0"]});
    let cfg = write_config(dir.path(), "c.json", &json!({ "params": params }));
    let report = stdout_json(&elastic(&["analyze", "--config", cfg.to_str().unwrap()]));
    assert_eq!(report["stable"], json!(true));
    assert_eq!(report["clouds"], json!([[1, 2]]));
}

#[test]
fn malformed_json_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"params\": ").unwrap();
    let out = elastic(&["analyze", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", &json!({ "params": two_cloud_params(), "speed": 3 }));
    let out = elastic(&["analyze", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_rates_are_a_config_error() {
    let dir = TempDir::new().unwrap();
    let params = json!({"masses": ["1"], "left_rates": ["-1"], "right_rates": ["1"]});
    let cfg = write_config(dir.path(), "c.json", &json!({ "params": params }));
    let out = elastic(&["analyze", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_without_seed_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", &json!({ "params": two_cloud_params() }));
    let run = dir.path().join("run");
    let out = elastic(&["simulate", "--config", cfg.to_str().unwrap(), "--events", "10", "--out", run.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        &json!({ "params": two_cloud_params(), "sim": {"events": 5000, "stride_events": 7} }),
    );
    let mut files = Vec::new();
    for name in ["a", "b"] {
        let run = dir.path().join(name);
        let out = elastic(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "42", "--out", run.to_str().unwrap()]);
        let summary = stdout_json(&out);
        assert_eq!(summary["status"], json!("completed"));
        assert_eq!(summary["event_count"], json!(5000));
        files.push((
            std::fs::read(run.join("trajectory.csv")).unwrap(),
            std::fs::read(run.join("observables.csv")).unwrap(),
        ));
    }
    assert_eq!(files[0], files[1]);
    let text = String::from_utf8(files[0].0.clone()).unwrap();
    assert!(text.starts_with("event,clock,x_1,x_2,x_3\n"));
}

#[test]
fn different_seeds_differ() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", &json!({ "params": two_cloud_params(), "sim": {"events": 2000} }));
    let read = |seed: &str| {
        let run = dir.path().join(seed);
        stdout_json(&elastic(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", seed, "--out", run.to_str().unwrap()]));
        std::fs::read(run.join("trajectory.csv")).unwrap()
    };
    assert_ne!(read("1"), read("2"));
}

#[test]
fn frozen_run_is_reported() {
    let dir = TempDir::new().unwrap();
    let params = json!({"masses": ["1", "1"], "left_rates": ["0", "1"], "right_rates": ["1", "0"]});
    let cfg = write_config(
        dir.path(),
        "c.json",
        &json!({ "params": params, "sim": {"mode": "exclusion", "events": 100} }),
    );
    let run = dir.path().join("run");
    let summary = stdout_json(&elastic(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "5", "--out", run.to_str().unwrap()]));
    assert_eq!(summary["status"], json!("frozen"));
    assert_eq!(summary["event_count"], json!(0));
}

#[test]
fn replicas_write_directories_and_aggregate() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", &json!({ "params": two_cloud_params(), "sim": {"events": 4000} }));
    let run = dir.path().join("run");
    let agg = stdout_json(&elastic(&[
        "simulate", "--config", cfg.to_str().unwrap(), "--seed", "9", "--replicas", "3", "--out", run.to_str().unwrap(),
    ]));
    for r in 0..3 {
        assert!(run.join(format!("replica_{r:03}/summary.json")).exists());
    }
    assert!(run.join("aggregate.json").exists());
    assert_eq!(agg["replicas"], json!(3));
    assert_eq!(agg["particles"][2]["predicted_speed"], json!("1/6"));
    assert_eq!(agg["particles"][2]["pooled"]["replicas"], json!(3));
}

#[test]
fn reversibility_cycle_products() {
    let dir = TempDir::new().unwrap();
    let params = json!({"masses": ["1", "1", "1"], "left_rates": ["1", "1", "2"], "right_rates": ["2", "1", "1"]});
    let cfg = write_config(
        dir.path(),
        "c.json",
        &json!({ "params": params, "reversibility": {"cycle": [[1, 1], [0, 2], [0, 1]]} }),
    );
    let report = stdout_json(&elastic(&["reversibility", "--config", cfg.to_str().unwrap()]));
    assert_eq!(report["cycle"]["forward_product"], json!("4"));
    assert_eq!(report["cycle"]["backward_product"], json!("6"));
    assert_eq!(report["cycle"]["reversible_on_cycle"], json!(false));
    assert_eq!(report["scan"]["verdict"], json!("violation"));

    let report = stdout_json(&elastic(&["reversibility", "--config", cfg.to_str().unwrap(), "--mode", "exclusion"]));
    assert_eq!(report["cycle"]["forward_product"], json!("2"));
    assert_eq!(report["cycle"]["backward_product"], json!("2"));
}

#[test]
fn stationary_pair_with_simulation() {
    let dir = TempDir::new().unwrap();
    let params = json!({"masses": ["1", "1"], "left_rates": ["0", "1"], "right_rates": ["1", "1"]});
    let cfg = write_config(dir.path(), "c.json", &json!({ "params": params, "sim": {"events": 200000} }));
    let out = dir.path().join("st");
    let report = stdout_json(&elastic(&["stationary", "--config", cfg.to_str().unwrap(), "--seed", "3", "--out", out.to_str().unwrap()]));
    assert_eq!(report["law"]["ratio"], json!("1/2"));
    let tv = report["empirical"]["tv_distance"].as_f64().unwrap();
    assert!(tv < 0.02, "tv {tv}");
    assert!(out.join("histogram.csv").exists());
    assert!(out.join("stationary.json").exists());
}

#[test]
fn stationary_rejects_unstable_pair() {
    let dir = TempDir::new().unwrap();
    let params = json!({"masses": ["1", "1"], "left_rates": ["1", "0"], "right_rates": ["0", "1"]});
    let cfg = write_config(dir.path(), "c.json", &json!({ "params": params }));
    let out = elastic(&["stationary", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn random_env_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", &json!({ "random_env": {"n": 6, "replicas": 300} }));
    let run = |seed: &str| stdout_json(&elastic(&["random-env", "--config", cfg.to_str().unwrap(), "--seed", seed]));
    let a = run("11");
    assert_eq!(a, run("11"));
    assert_eq!(a["replicas"], json!(300));
    let mean = a["mean"].as_f64().unwrap();
    assert!((1.0..=6.0).contains(&mean));
}

#[test]
fn plot_data_writes_inputs() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", &json!({ "params": two_cloud_params(), "sim": {"events": 20000} }));
    let out = dir.path().join("plot");
    let listing = stdout_json(&elastic(&["plot-data", "--config", cfg.to_str().unwrap(), "--seed", "4", "--out", out.to_str().unwrap()]));
    assert_eq!(listing["files"].as_array().unwrap().len(), 6);
    let majorant: Value = serde_json::from_str(&std::fs::read_to_string(out.join("majorant.json")).unwrap()).unwrap();
    assert_eq!(majorant["u_points"], json!(["0", "0", "-1", "-1/3"]));
    assert_eq!(majorant["boundary"], json!([0, 1, 3]));
    let spans = std::fs::read_to_string(out.join("span_tail.csv")).unwrap();
    assert!(spans.starts_with("s,cloud_1,cloud_2\n0,1,1\n"));
    let occ = std::fs::read_to_string(out.join("occupation.csv")).unwrap();
    assert!(occ.starts_with("x,L_1\n"));
}

#[test]
fn plot_data_without_horizon_writes_majorant_only() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", &json!({ "params": two_cloud_params() }));
    let out = dir.path().join("plot");
    let listing = stdout_json(&elastic(&["plot-data", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]));
    assert_eq!(listing["files"], json!(["majorant.json"]));
}
