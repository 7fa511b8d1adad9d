use crate::config::{Command, CommandConfig, ContractArgs, DualArgs, FlowArgs, ScenarioKind, SearchArgs};
use crate::report::Table;
use normflow::contraction::{
    check_contraction, check_k_contraction, default_grid, distance_at, distance_profile, estimate_best_constant,
};
use normflow::flow::{edi_residual, integrate};
use normflow::scenarios::{search_witness, step1_space, step3_tangency_scan, Params};
use normflow::{ConvexFunction, Family, NormDescriptor, ParameterGrid, Scenario};
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt;

/// Failure of a run, classified by exit status.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Malformed configuration or specification; exit status 1.
    Input(String),
    /// Numerical failure on valid input; exit status 2.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Numeric(_) => 2,
        }
    }

    pub(crate) fn input(what: impl fmt::Display) -> Self {
        CliError::Input(what.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Numeric(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<normflow::Error> for CliError {
    fn from(e: normflow::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Results payload of a command, its tabular view and a one-line summary.
pub struct Outcome {
    pub results: Value,
    pub table: Table,
    pub summary: String,
}

fn parse<T: std::str::FromStr<Err = normflow::Error>>(what: &str, s: &str) -> Result<T> {
    s.parse::<T>().map_err(|e| CliError::input(format!("--{what}: {e}")))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("payload types serialize")
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::input(format!("--{name} must be positive, got {v}")))
    }
}

pub fn execute(config: &CommandConfig) -> Result<Outcome> {
    match &config.command {
        Command::Axioms(a) => {
            let space: NormDescriptor = parse("space", &a.space)?;
            if a.samples == 0 {
                return Err(CliError::input("--samples must be at least 1"));
            }
            let report = space.check_axioms(a.samples, config.seed);
            let mut table = Table::new(["axiom", "passed", "worst_violation"]);
            for (name, check) in [
                ("positivity", &report.positivity),
                ("homogeneity", &report.homogeneity),
                ("triangle", &report.triangle),
                ("strict_convexity", &report.strict_convexity),
            ] {
                table.push([name.to_string(), check.passed.to_string(), fmt_f64(check.worst_violation)]);
            }
            table.push(["symmetric".into(), report.symmetric.to_string(), String::new()]);
            let summary = format!(
                "axioms {} (symmetric: {}, strictly convex: {})",
                if report.all_axioms_pass() { "pass" } else { "FAIL" },
                report.symmetric,
                report.strictly_convex
            );
            Ok(Outcome { results: to_value(&report), table, summary })
        }
        Command::Dual(a) => dual(a),
        Command::Flow(a) => flow(a),
        Command::Contract(a) => contract(a),
        Command::Scenario { kind } => scenario(kind),
        Command::Witness(a) => search(a, false),
        Command::Bestc(a) => search(a, true),
    }
}

fn dual(a: &DualArgs) -> Result<Outcome> {
    let space: NormDescriptor = parse("space", &a.space)?;
    let alpha = &a.alpha.0;
    let norm = space.dual_norm(alpha)?;
    let legendre = space.legendre(alpha)?;
    let maximizer = space.dual_maximizer(alpha)?;
    let tensor = space.dual_metric_tensor(alpha).ok();
    let results = json!({
        "alpha": alpha,
        "dual_norm": norm,
        "legendre": legendre,
        "dual_maximizer": maximizer,
        "dual_metric_tensor": tensor,
    });
    let n = alpha.len();
    let mut header: Vec<String> = (1..=n).map(|i| format!("alpha{i}")).collect();
    header.push("dual_norm".into());
    header.extend((1..=n).map(|i| format!("legendre{i}")));
    let mut row: Vec<String> = alpha.iter().map(|x| fmt_f64(*x)).collect();
    row.push(fmt_f64(norm));
    row.extend(legendre.iter().map(|x| fmt_f64(*x)));
    let mut table = Table::new(header);
    table.push(row);
    Ok(Outcome { results, table, summary: format!("{norm:.6}") })
}

fn flow(a: &FlowArgs) -> Result<Outcome> {
    let space: NormDescriptor = parse("space", &a.space)?;
    let f: ConvexFunction = parse("function", &a.function)?;
    positive("T", a.horizon)?;
    positive("tol", a.tol)?;
    let traj = integrate(&space, &f, &a.x0.0, a.horizon, a.tol)?;
    let edi = edi_residual(&space, &f, &traj, 0.0, traj.end_time())?;
    let samples = traj.samples(a.samples);
    let n = traj.dim();
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.push("f".into());
    let mut table = Table::new(header);
    let mut sample_docs = Vec::with_capacity(samples.len());
    for (t, x) in &samples {
        let fx = f.eval(x)?;
        let mut row = vec![fmt_f64(*t)];
        row.extend(x.iter().map(|v| fmt_f64(*v)));
        row.push(fmt_f64(fx));
        table.push(row);
        sample_docs.push(json!({ "t": t, "x": x, "f": fx }));
    }
    let end = traj.point_at(traj.end_time())?;
    let summary = format!(
        "{} breakpoints, status {:?}, end point {:?}, EDI residual {:.3e}",
        traj.breakpoints().len(),
        traj.status(),
        end,
        edi.residual
    );
    let results = json!({
        "trajectory": traj,
        "end_point": end,
        "samples": sample_docs,
        "edi": edi,
    });
    Ok(Outcome { results, table, summary })
}

fn contract(a: &ContractArgs) -> Result<Outcome> {
    let space: NormDescriptor = parse("space", &a.space)?;
    let f: ConvexFunction = parse("function", &a.function)?;
    positive("T", a.horizon)?;
    positive("tol", a.tol)?;
    positive("violation-tol", a.violation_tol)?;
    let xi = integrate(&space, &f, &a.x0.0, a.horizon, a.tol)?;
    let zeta = integrate(&space, &f, &a.y0.0, a.horizon, a.tol)?;
    let grid = default_grid(&xi, &zeta);
    let profile = distance_profile(&space, &xi, &zeta, &grid)?;
    let report = match a.k {
        Some(k) => check_k_contraction(&profile, k, a.violation_tol)?,
        None => check_contraction(&profile, a.violation_tol)?,
    };
    let mut at = Vec::new();
    for &t in a.at.as_ref().map(|p| p.0.as_slice()).unwrap_or(&[]) {
        at.push(json!({ "t": t, "d": distance_at(&space, &xi, &zeta, t)? }));
    }
    let end = xi.end_time().min(zeta.end_time());
    let edi = [
        edi_residual(&space, &f, &xi, 0.0, end)?.residual,
        edi_residual(&space, &f, &zeta, 0.0, end)?.residual,
    ];
    let mut header = vec!["t", "d"];
    if profile.reversed.is_some() {
        header.push("d_reversed");
    }
    let mut table = Table::new(header);
    for (k, t) in profile.times.iter().enumerate() {
        let mut row = vec![fmt_f64(*t), fmt_f64(profile.values[k])];
        if let Some(r) = &profile.reversed {
            row.push(fmt_f64(r[k]));
        }
        table.push(row);
    }
    let summary = format!(
        "max ratio {:.6} at t = {:.6}; {}",
        report.max_ratio,
        report.time_of_max,
        if report.violated() { "violation" } else { "no violation" }
    );
    let results = json!({
        "profile": profile,
        "report": report,
        "at": at,
        "edi_residual": edi,
        "status": [xi.status(), zeta.status()],
    });
    Ok(Outcome { results, table, summary })
}

fn scenario(kind: &ScenarioKind) -> Result<Outcome> {
    let (family, space, params) = match kind {
        ScenarioKind::Step3 { space, samples } => {
            let space: NormDescriptor = parse("space", space)?;
            let scan = step3_tangency_scan(&space, *samples)?;
            let mut table = Table::new(["v1", "v2", "w1", "w2", "derivative"]);
            for s in &scan.samples {
                table.push([s.v[0], s.v[1], s.w[0], s.w[1], s.derivative].map(fmt_f64));
            }
            let summary = format!("tangency score {:.6e}", scan.score);
            return Ok(Outcome { results: json!({ "space": space, "scan": scan }), table, summary });
        }
        ScenarioKind::Step1 { eps, c, space, scale } => {
            let space = match space {
                Some(s) => parse("space", s)?,
                None => step1_space(),
            };
            (Family::Step1, space, params(&[("eps", *eps), ("c", *c), ("scale", *scale)]))
        }
        ScenarioKind::Step2 { space, c, s, scale } => {
            (Family::Step2, parse("space", space)?, params(&[("c", *c), ("s", *s), ("scale", *scale)]))
        }
        ScenarioKind::Step4 { p, space, a, s, scale } => {
            let space = match space {
                Some(sp) => parse("space", sp)?,
                None => NormDescriptor::lp(*p, 2)?,
            };
            (Family::Step4, space, params(&[("a", *a), ("s", *s), ("scale", *scale)]))
        }
    };
    let sc = Scenario::build(family, &space, &params)?;
    let run = sc.run()?;
    let mut table = Table::new([
        "pair",
        "d0",
        "d_end",
        "max_ratio",
        "time_of_max",
        "violation",
        "fidelity_error",
        "edi_residual",
    ]);
    for p in &run.pairs {
        table.push([
            p.label.clone(),
            fmt_f64(p.d0),
            fmt_f64(p.d_end),
            fmt_f64(p.report.max_ratio),
            fmt_f64(p.report.time_of_max),
            p.report.violated().to_string(),
            p.fidelity_error.map(fmt_f64).unwrap_or_default(),
            fmt_f64(p.edi_residual),
        ]);
    }
    let summary = format!(
        "{family}: max ratio {:.6} (pair {}){}",
        run.max_ratio,
        run.argmax_pair,
        if run.violation { ", contraction violated" } else { "" }
    );
    Ok(Outcome { results: json!({ "scenario": sc, "run": run }), table, summary })
}

fn search(a: &SearchArgs, best_constant: bool) -> Result<Outcome> {
    let space: NormDescriptor = parse("space", &a.space)?;
    let family: Family = parse("family", &a.family)?;
    let grid: ParameterGrid = parse("grid", &a.grid)?;
    if grid.is_empty() {
        return Err(CliError::input("--grid must contain at least one point"));
    }
    let (results, ratio, argmax) = if best_constant {
        let b = estimate_best_constant(&space, family, &grid)?;
        (to_value(&b), b.c_hat, b.argmax_params)
    } else {
        let w = search_witness(&space, family, &grid)?;
        (to_value(&w), w.max_ratio, w.argmax_params)
    };
    let mut header: Vec<String> = argmax.keys().cloned().collect();
    header.push(if best_constant { "c_hat" } else { "max_ratio" }.into());
    let mut row: Vec<String> = argmax.values().map(|v| fmt_f64(*v)).collect();
    row.push(fmt_f64(ratio));
    let mut table = Table::new(header);
    table.push(row);
    let summary = format!("{family} on {space}: ratio {ratio:.6} at {argmax:?}");
    Ok(Outcome { results, table, summary })
}

fn params(items: &[(&str, f64)]) -> Params {
    items.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
