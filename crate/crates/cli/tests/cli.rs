mod common;

use common::*;
use serde_json::Value;

fn stdout_json(out: &std::process::Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn golden_reports_reproduce() {
    for name in GOLDEN_FILES {
        let diff = check_golden(name);
        assert!(diff.is_empty(), "{name}: {diff:#?}");
    }
}

#[test]
fn golden_comparison_catches_drift() {
    let a = serde_json::json!({"x": 1.0, "duration_s": 1.0, "y": [0.0, "s"]});
    let b = serde_json::json!({"x": 1.0 + 1e-8, "duration_s": 7.0, "y": [1e-17, "s"]});
    let mut out = Vec::new();
    mismatches(&a, &b, "", &mut out);
    assert_eq!(out.len(), 1, "{out:?}");
    assert!(out[0].starts_with(".x"));
}

#[test]
fn dual_norm_of_lp4() {
    let out = normflow(&["dual", "--space", "lp:p=4", "--alpha", "1,1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stderr).trim(), "1.681793");
    let doc = stdout_json(&out);
    let v = doc["results"]["dual_norm"].as_f64().unwrap();
    assert!((v - 2f64.powf(0.75)).abs() < 1e-12);
}

#[test]
fn violations_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = normflow(&["scenario", "step1", "--eps", "0.5", "--c", "0.9", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["results"]["run"]["violation"], true);
    let r = doc["results"]["run"]["max_ratio"].as_f64().unwrap();
    assert!((r - 1.039739).abs() <= 1e-6, "{r}");
}

#[test]
fn malformed_matrix_is_an_input_error() {
    let out = normflow(&[
        "flow", "--space", "lp:p=3", "--function", "quad:A=[[1,0],[0;2]];b=(0,0);c=0", "--x0", "1,1", "--T", "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--function") && err.contains("parse error"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn exit_statuses() {
    assert_eq!(normflow(&["--help"]).status.code(), Some(0));
    assert_eq!(normflow(&["--version"]).status.code(), Some(0));
    assert_eq!(normflow(&["--bogus"]).status.code(), Some(1));
    assert_eq!(normflow(&[]).status.code(), Some(1));
    assert_eq!(normflow(&["dual", "--space", "lp:p=0.5", "--alpha", "1,1"]).status.code(), Some(1));
    assert_eq!(normflow(&["dual", "--space", "lp:p=4", "--alpha", "1,x"]).status.code(), Some(1));
    assert_eq!(normflow(&["witness", "--space", "lp:p=4", "--family", "step9", "--grid", "a=1"]).status.code(), Some(1));
    assert_eq!(
        normflow(&["contract", "--space", "euclid", "--function", "maxaff:[(1,0|0)]", "--x0", "1,0", "--y0", "0,1", "--T", "-1"])
            .status
            .code(),
        Some(1)
    );
    // degenerate input to the numerics
    assert_eq!(normflow(&["dual", "--space", "lp:p=4", "--alpha", "0,0"]).status.code(), Some(2));
}

#[test]
fn config_echo_reproduces_the_payload() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    let out = normflow(&[
        "axioms", "--space", "asym:beta=(0.5,0)", "--samples", "200", "--seed", "11", "--out", first.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = normflow(&["--config", first.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let a: Value = serde_json::from_str(&std::fs::read_to_string(&first).unwrap()).unwrap();
    let b: Value = serde_json::from_str(&std::fs::read_to_string(&second).unwrap()).unwrap();
    assert_eq!(a["results"], b["results"]);
    assert_eq!(a["config"]["command"], b["config"]["command"]);
    assert_eq!(a["results"]["symmetric"], false);
}

#[test]
fn csv_output() {
    let out = normflow(&[
        "flow", "--space", "euclid_l1:lambda=(0,1)", "--function", "maxaff:[(-1,0.5|0),(-0.9,-0.45|0)]", "--x0",
        "1,0.2", "--T", "0.5", "--samples", "11", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(rdr.headers().unwrap(), vec!["t", "x1", "x2", "f"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 11);
    let t: f64 = rows[10][0].parse().unwrap();
    assert!((t - 0.5).abs() < 1e-15);
}

#[test]
fn search_commands() {
    let out = normflow(&["witness", "--space", "lp:p=4", "--family", "step4", "--grid", "a=0.25,0.5,1"]);
    assert_eq!(out.status.code(), Some(0));
    let w = stdout_json(&out);
    assert!(w["results"]["max_ratio"].as_f64().unwrap() > 1.0 + 1e-6);
    assert_eq!(w["results"]["evaluated"], 3);
    let out = normflow(&["bestc", "--space", "euclid", "--family", "step4", "--grid", "a=0.5,1"]);
    assert_eq!(out.status.code(), Some(0));
    let b = stdout_json(&out);
    assert!((b["results"]["c_hat"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn scenario_variants() {
    let out = normflow(&["scenario", "step2", "--space", "asym:beta=(0.5,0)", "--c", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["results"]["run"]["violation"], true);
    let out = normflow(&["scenario", "step3", "--space", "lp:p=4", "--samples", "90"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_json(&out)["results"]["scan"]["score"].as_f64().unwrap() > 1e-3);
    let out = normflow(&["scenario", "step4", "--space", "euclid", "--a", "-0.5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["results"]["run"]["violation"], false);
}
