//! End-to-end checks of the `pmo-neuron` binary: exit codes, artifact
//! layout, and that stdout carries the machine-readable summary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_pmo-neuron");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .output()
        .expect("binary failed to launch")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("scenario.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn simulate_produces_artifacts_and_summary() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[scenario]\nkind = \"constant\"\nt_end_s = 20e-6\n[stimulus]\nv_input_v = -1.6\n",
    );
    let out = dir.path().join("out");
    let res = run(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--plot",
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    for name in ["run_trace.csv", "run_spikes.csv", "run_summary.json", "run_trace.svg"] {
        assert!(out.join(name).exists(), "missing artifact {name}");
    }
    let stdout = String::from_utf8(res.stdout).unwrap();
    let summary: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!(summary["spike_count"].as_u64().unwrap() > 0);
    assert!(summary["mean_frequency_hz"].as_f64().unwrap() > 1e5);
}

#[test]
fn missing_config_is_a_usage_error() {
    let res = run(&["simulate"]);
    assert_eq!(res.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("--config"), "{stderr}");
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[scenario]\nkind = \"constant\"\n[stimulus]\nv_input = -1.6\n",
    );
    let res = run(&["simulate", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("unknown field"), "{stderr}");
}

#[test]
fn infeasible_calibration_is_a_numeric_error() {
    let dir = TempDir::new().unwrap();
    // A sub-threshold observation no parameter set in bounds can match.
    fs::write(
        dir.path().join("obs.csv"),
        "v_volts,t_spike_seconds,weight\n0.05,1e-7,1.0\n0.06,9e-8,1.0\n0.07,8e-8,1.0\n",
    )
    .unwrap();
    let cfg = write_config(
        dir.path(),
        "[scenario]\nkind = \"calibrate\"\n[calibration]\nobservations_csv = \"obs.csv\"\n",
    );
    let res = run(&[
        "calibrate",
        "--config",
        &cfg,
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(3), "{}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn subcommand_scenario_kinds_must_match() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[scenario]\nkind = \"constant\"\n[stimulus]\nv_input_v = -1.6\n",
    );
    let res = run(&["calibrate", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(2));
    let res = run(&["scaling", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn sweep_aggregates_points() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[scenario]\nkind = \"constant\"\nt_end_s = 5e-6\n[stimulus]\nv_input_v = -1.6\n\
         [sweep]\nv_input_v = [-1.6, -1.9]\n",
    );
    let out = dir.path().join("out");
    let res = run(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert!(csv.starts_with("v_input_v,spike_count,frequency_hz,refractory_gap_s\n"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn scaling_runs_without_config() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let res = run(&["scaling", "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(out.join("scaling_report.txt").exists());
    assert!(out.join("scaling_report.csv").exists());
    let stdout = String::from_utf8(res.stdout).unwrap();
    let summary: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!(summary["scaling"]["transistor_count"].as_u64().unwrap() > 0);
}

#[test]
fn patterns_writes_both_scenarios() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let res = run(&["patterns", "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let stdout = String::from_utf8(res.stdout).unwrap();
    let summaries: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let arr = summaries.as_array().unwrap();
    assert_eq!(arr.len(), 2);
    assert_eq!(arr[0]["pattern"], "CH");
    assert_eq!(arr[1]["pattern"], "IB");
    assert!(out.join("ch/run_summary.json").exists());
    assert!(out.join("ib/run_summary.json").exists());
}
