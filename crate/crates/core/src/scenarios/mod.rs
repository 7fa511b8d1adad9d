//! Planar counterexample constructions and a grid search for contraction witnesses.
//!
//! Every scenario lives in the `x¹x²`-plane; on spaces of higher dimension the
//! trailing coordinates are zero.

mod search;
mod step1;
mod step2;
mod step3;
mod step4;

pub use search::{search_witness, ParameterGrid, Witness};
pub use step1::{step1_on, step1_scenario, step1_space};
pub use step2::step2_scenario;
pub use step3::{step3_tangency_scan, TangencySample, TangencyScan};
pub use step4::{step4_on, step4_scenario};

use crate::contraction::{check_contraction, default_grid, distance_profile, ContractionReport, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::flow::{edi_residual, integrate_max_affine, Trajectory};
use crate::functions::ConvexFunction;
use crate::linalg::max_abs;
use crate::norms::NormDescriptor;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

pub type Params = BTreeMap<String, f64>;

/// Horizons stop this fraction short of the region-validity bound.
pub(crate) const HORIZON_MARGIN: f64 = 1e-6;
pub const DEFAULT_S: f64 = 0.01;
/// Sequence of `s` used for the Richardson `s → 0` limits.
pub const RICHARDSON_S: [f64; 3] = [0.02, 0.01, 0.005];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Step1,
    Step2,
    Step4,
}

impl Family {
    pub fn parameter_names(self) -> &'static [&'static str] {
        match self {
            Family::Step1 => &["eps", "c", "scale"],
            Family::Step2 => &["c", "s", "scale"],
            Family::Step4 => &["a", "s", "scale"],
        }
    }

    pub fn defaults(self) -> Params {
        let pairs: &[(&str, f64)] = match self {
            Family::Step1 => &[("eps", 0.5), ("c", 0.9)],
            Family::Step2 => &[("c", 0.5), ("s", DEFAULT_S)],
            Family::Step4 => &[("a", 0.5), ("s", DEFAULT_S)],
        };
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Step1 => "step1",
            Family::Step2 => "step2",
            Family::Step4 => "step4",
        })
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "step1" => Ok(Family::Step1),
            "step2" => Ok(Family::Step2),
            "step4" => Ok(Family::Step4),
            other => Err(Error::parse(other, "family must be step1, step2 or step4")),
        }
    }
}

/// A closed-form straight curve `origin + t·velocity`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Line {
    pub origin: Vec<f64>,
    pub velocity: Vec<f64>,
}

impl Line {
    pub fn at(&self, t: f64) -> Vec<f64> {
        self.origin.iter().zip(&self.velocity).map(|(o, v)| o + t * v).collect()
    }
}

/// Two start points; distances are measured as `‖ζ(t) − ξ(t)‖` with `ξ` from `first`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartPair {
    pub label: String,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub horizon: f64,
    /// Expected curves from `first` and `second`, when known in closed form.
    pub expected: Option<[Line; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub family: Family,
    pub params: Params,
    pub space: NormDescriptor,
    pub function: ConvexFunction,
    pub start_points: Vec<StartPair>,
    pub horizon: f64,
    pub diagnostics: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairOutcome {
    pub label: String,
    pub report: ContractionReport,
    pub d0: f64,
    pub d_end: f64,
    /// Largest deviation from the closed-form curves on the grid.
    pub fidelity_error: Option<f64>,
    /// Largest `|residual|` of the energy-dissipation check over both curves.
    pub edi_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioRun {
    pub pairs: Vec<PairOutcome>,
    pub max_ratio: f64,
    pub time_of_max: f64,
    pub argmax_pair: String,
    pub violation: bool,
}

impl Scenario {
    pub fn build(family: Family, space: &NormDescriptor, params: &Params) -> Result<Self> {
        for key in params.keys() {
            if !family.parameter_names().contains(&key.as_str()) {
                return Err(Error::param(key, format!("not a {family} parameter")));
            }
        }
        let mut p = family.defaults();
        p.extend(params.iter().map(|(k, v)| (k.clone(), *v)));
        let base = match family {
            Family::Step1 => step1_on(space, p["eps"], p["c"])?,
            Family::Step2 => step2_scenario(space, p["c"], p["s"])?,
            Family::Step4 => step4_on(space, p["a"], p["s"])?,
        };
        match p.get("scale") {
            Some(&k) if k != 1.0 => base.with_function_scale(k),
            _ => Ok(base),
        }
    }

    /// Replaces `f` by `k·f`; curves run `k` times faster, so horizons shrink by `k`.
    pub fn with_function_scale(mut self, k: f64) -> Result<Self> {
        self.function = self.function.scale(k)?;
        self.params.insert("scale".into(), k);
        for pair in &mut self.start_points {
            pair.horizon /= k;
            if let Some(lines) = pair.expected.as_mut() {
                for line in lines.iter_mut() {
                    line.velocity.iter_mut().for_each(|v| *v *= k);
                }
            }
        }
        self.horizon /= k;
        Ok(self)
    }

    pub fn pair(&self, label: &str) -> Option<&StartPair> {
        self.start_points.iter().find(|p| p.label == label)
    }

    pub fn diagnostic(&self, name: &str) -> Option<f64> {
        self.diagnostics.get(name).and_then(Value::as_f64)
    }

    /// Integrates both curves of `pair` exactly.
    pub fn trajectories(&self, pair: &StartPair) -> Result<(Trajectory, Trajectory)> {
        Ok((
            integrate_max_affine(&self.space, &self.function, &pair.first, pair.horizon)?,
            integrate_max_affine(&self.space, &self.function, &pair.second, pair.horizon)?,
        ))
    }

    pub fn run(&self) -> Result<ScenarioRun> {
        let mut pairs = Vec::new();
        for pair in &self.start_points {
            let (xi, zeta) = self.trajectories(pair)?;
            let grid = default_grid(&xi, &zeta);
            let profile = distance_profile(&self.space, &xi, &zeta, &grid)?;
            let report = check_contraction(&profile, DEFAULT_TOL)?;
            let fidelity_error = pair.expected.as_ref().map(|[a, b]| {
                grid.iter()
                    .map(|&t| {
                        let ea = deviation(&xi.eval_point(t), &a.at(t));
                        let eb = deviation(&zeta.eval_point(t), &b.at(t));
                        ea.max(eb)
                    })
                    .fold(0.0, f64::max)
            });
            let end = xi.end_time().min(zeta.end_time());
            let edi = edi_residual(&self.space, &self.function, &xi, 0.0, end)?
                .residual
                .abs()
                .max(edi_residual(&self.space, &self.function, &zeta, 0.0, end)?.residual.abs());
            pairs.push(PairOutcome {
                label: pair.label.clone(),
                d0: profile.values[0],
                d_end: *profile.values.last().unwrap(),
                report,
                fidelity_error,
                edi_residual: edi,
            });
        }
        let best = pairs
            .iter()
            .fold(None::<&PairOutcome>, |acc, p| match acc {
                Some(b) if b.report.max_ratio >= p.report.max_ratio => Some(b),
                _ => Some(p),
            })
            .ok_or(Error::Empty("scenario has no start pairs"))?;
        Ok(ScenarioRun {
            max_ratio: best.report.max_ratio,
            time_of_max: best.report.time_of_max,
            argmax_pair: best.label.clone(),
            violation: pairs.iter().any(|p| p.report.violated()),
            pairs,
        })
    }
}

fn deviation(a: &[f64], b: &[f64]) -> f64 {
    max_abs(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>())
}

/// Embeds a planar point into `ℝⁿ`.
pub(crate) fn planar(n: usize, x1: f64, x2: f64) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[0] = x1;
    v[1] = x2;
    v
}

pub(crate) fn require_plane(space: &NormDescriptor) -> Result<usize> {
    let n = space.dim();
    if n < 2 {
        return Err(Error::NotApplicable(format!("scenarios need dimension ≥ 2, got {n}")));
    }
    Ok(n)
}

/// Richardson extrapolation to `s → 0` from values at `s`, `s/2`, `s/4`.
pub(crate) fn richardson(d: [f64; 3]) -> f64 {
    let r1 = 2.0 * d[1] - d[0];
    let r2 = 2.0 * d[2] - d[1];
    (4.0 * r2 - r1) / 3.0
}

/// Checks that `x` lies in the open region where piece `k` alone is active.
pub(crate) fn check_region(f: &ConvexFunction, x: &[f64], k: usize, what: &str) -> Result<()> {
    let face = f.active_set(x, None)?;
    if face.active != [k] {
        return Err(Error::NotApplicable(format!(
            "{what} is not inside the region of piece {k} (active pieces {:?})",
            face.active
        )));
    }
    Ok(())
}
