#![allow(dead_code)]

use normflow_cli::{CommandConfig, ReportDocument};
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const GOLDEN_REL_TOL: f64 = 1e-9;
/// Values this small are round-off and compared absolutely.
pub const GOLDEN_FLOOR: f64 = 1e-15;

pub const GOLDEN_FILES: [&str; 3] =
    ["step1_eps0.5_c0.9.json", "step4_p4_a0.5_s0.01.json", "k_contraction_diag12.json"];

pub fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

pub fn normflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_normflow")).args(args).output().expect("binary runs")
}

/// Paths where `a` and `b` differ beyond the golden tolerance, ignoring `duration_s`.
pub fn mismatches(a: &Value, b: &Value, path: &str, out: &mut Vec<String>) {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            for key in x.keys().chain(y.keys().filter(|k| !x.contains_key(*k))) {
                if key == "duration_s" {
                    continue;
                }
                match (x.get(key), y.get(key)) {
                    (Some(u), Some(v)) => mismatches(u, v, &format!("{path}.{key}"), out),
                    _ => out.push(format!("{path}.{key}: present on one side only")),
                }
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                out.push(format!("{path}: lengths {} vs {}", x.len(), y.len()));
                return;
            }
            for (k, (u, v)) in x.iter().zip(y).enumerate() {
                mismatches(u, v, &format!("{path}[{k}]"), out);
            }
        }
        (Value::Number(x), Value::Number(y)) => {
            let (p, q) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            let scale = p.abs().max(q.abs());
            if (p - q).abs() > GOLDEN_REL_TOL * scale && (p - q).abs() > GOLDEN_FLOOR {
                out.push(format!("{path}: {p:e} vs {q:e}"));
            }
        }
        _ => {
            if a != b {
                out.push(format!("{path}: {a} vs {b}"));
            }
        }
    }
}

/// Re-runs the configuration echoed in a golden file and lists the differences.
pub fn check_golden(name: &str) -> Vec<String> {
    let text = std::fs::read_to_string(golden_path(name)).expect("golden file exists");
    let golden: Value = serde_json::from_str(&text).unwrap();
    let config: CommandConfig = serde_json::from_value(golden["config"].clone()).unwrap();
    let (doc, _, _) = normflow_cli::run(&config).unwrap();
    let fresh = serde_json::to_value(&doc).unwrap();
    let mut out = Vec::new();
    mismatches(&golden, &fresh, "", &mut out);
    out
}

pub fn golden_doc(name: &str) -> ReportDocument {
    serde_json::from_str(&std::fs::read_to_string(golden_path(name)).unwrap()).unwrap()
}
