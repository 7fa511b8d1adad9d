//! Distances between gradient curves and the contraction diagnostics built on them.

use crate::error::{check_dim, Error, Result};
use crate::flow::{integrate, Trajectory};
use crate::functions::ConvexFunction;
use crate::linalg::{dot, neg, sub};
use crate::norms::{mat_vec, NormDescriptor};
use crate::scenarios::{search_witness, Family, ParameterGrid, Params};
use serde::Serialize;

/// Relative slack before a distance increase counts as a violation.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Uniform samples in a default profile grid, before breakpoints are merged in.
pub const DEFAULT_GRID: usize = 256;
/// Tolerance handed to the smooth integrator by the diagnostics below.
pub const SMOOTH_TOL: f64 = 1e-12;

/// `d(t) = ‖ζ(t) − ξ(t)‖` on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceProfile {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// `‖ξ(t) − ζ(t)‖`, present for asymmetric norms.
    pub reversed: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport {
    pub monotone: bool,
    pub first_violation_t: Option<f64>,
    pub max_ratio: f64,
    pub time_of_max: f64,
    pub k: f64,
    pub tol: f64,
}

impl ContractionReport {
    pub fn violated(&self) -> bool {
        !self.monotone
    }
}

/// 256 uniform times on the common domain of both curves plus all their breakpoints inside it.
pub fn default_grid(xi: &Trajectory, zeta: &Trajectory) -> Vec<f64> {
    let end = xi.end_time().min(zeta.end_time());
    let mut grid: Vec<f64> = (0..DEFAULT_GRID)
        .map(|k| end * k as f64 / (DEFAULT_GRID - 1) as f64)
        .collect();
    grid.extend(xi.times().into_iter().chain(zeta.times()).filter(|t| *t <= end));
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs().max(1.0));
    grid
}

pub fn distance_at(space: &NormDescriptor, xi: &Trajectory, zeta: &Trajectory, t: f64) -> Result<f64> {
    Ok(space.eval(&sub(&zeta.point_at(t)?, &xi.point_at(t)?)))
}

pub fn distance_profile(
    space: &NormDescriptor,
    xi: &Trajectory,
    zeta: &Trajectory,
    grid: &[f64],
) -> Result<DistanceProfile> {
    check_dim(space.dim(), &xi.point_at(0.0)?)?;
    check_dim(space.dim(), &zeta.point_at(0.0)?)?;
    if grid.is_empty() {
        return Err(Error::Empty("profile grid"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("grid", "times must increase strictly"));
    }
    let mut values = Vec::with_capacity(grid.len());
    let mut reversed = (!space.is_symmetric()).then(Vec::new);
    for &t in grid {
        let diff = sub(&zeta.point_at(t)?, &xi.point_at(t)?);
        values.push(space.eval(&diff));
        if let Some(r) = reversed.as_mut() {
            r.push(space.eval(&neg(&diff)));
        }
    }
    Ok(DistanceProfile { times: grid.to_vec(), values, reversed })
}

pub fn check_contraction(profile: &DistanceProfile, tol: f64) -> Result<ContractionReport> {
    check_k_contraction(profile, 0.0, tol)
}

/// Checks `d(t) ≤ e^{−K(t−t₀)}·d(t₀)·(1 + tol)` with `t₀` the first grid time.
pub fn check_k_contraction(profile: &DistanceProfile, k: f64, tol: f64) -> Result<ContractionReport> {
    if profile.values.is_empty() {
        return Err(Error::Empty("distance profile"));
    }
    if !(tol >= 0.0) || !k.is_finite() {
        return Err(Error::param("tol", "tolerance must be nonnegative and K finite"));
    }
    let t0 = profile.times[0];
    let d0 = profile.values[0];
    let mut first_violation_t = None;
    let mut max_ratio: f64 = 1.0;
    let mut time_of_max = t0;
    for (&t, &d) in profile.times.iter().zip(&profile.values) {
        let bound = (-k * (t - t0)).exp() * d0;
        let ratio = if bound > 0.0 {
            d / bound
        } else if d > 0.0 {
            f64::INFINITY
        } else {
            1.0
        };
        if ratio > max_ratio {
            max_ratio = ratio;
            time_of_max = t;
        }
        if first_violation_t.is_none() && d > bound * (1.0 + tol) {
            first_violation_t = Some(t);
        }
    }
    Ok(ContractionReport {
        monotone: first_violation_t.is_none(),
        first_violation_t,
        max_ratio,
        time_of_max,
        k,
        tol,
    })
}

/// `(df(x) − df(y))·(y − x)`, nonpositive for convex `f`.
pub fn monotonicity_gap(f: &ConvexFunction, x: &[f64], y: &[f64]) -> Result<f64> {
    let dx = f.differential(x)?;
    let dy = f.differential(y)?;
    Ok(dot(&sub(&dx, &dy), &sub(y, x)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Commutativity {
    /// Largest entrywise deviation among `g*(−df(x))`, `g*(−df(y))` and `g(y − x)⁻¹`.
    Defect(f64),
    /// `g(y − x)` is not positive-definite.
    Degenerate(String),
}

pub fn commutativity_defect(
    space: &NormDescriptor,
    f: &ConvexFunction,
    x: &[f64],
    y: &[f64],
) -> Result<Commutativity> {
    check_dim(space.dim(), x)?;
    check_dim(space.dim(), y)?;
    let u = sub(y, x);
    if u.iter().all(|c| *c == 0.0) {
        return Err(Error::ZeroArgument("commutativity needs x ≠ y"));
    }
    let dx = f.differential(x)?;
    let dy = f.differential(y)?;
    if dx.iter().all(|c| *c == 0.0) || dy.iter().all(|c| *c == 0.0) {
        return Err(Error::ZeroArgument("commutativity needs df ≠ 0"));
    }
    let g = space.metric_tensor(&u)?;
    if !g.positive_definite {
        return Ok(Commutativity::Degenerate(format!(
            "g(y − x) has smallest eigenvalue {:e}",
            g.min_eigenvalue
        )));
    }
    let g_inv = g.matrix.clone().try_inverse().ok_or_else(|| Error::Degenerate("g(y − x) is singular".into()))?;
    let gx = space.dual_metric_tensor(&neg(&dx))?.matrix;
    let gy = space.dual_metric_tensor(&neg(&dy))?.matrix;
    let defect = (&gx - &gy).amax().max((&gx - &g_inv).amax()).max((&gy - &g_inv).amax());
    Ok(Commutativity::Defect(defect))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstVariation {
    /// `2Σ g_ij(ζ−ξ)(ζ−ξ)_i (g*(−dfξ)dfξ − g*(−dfζ)dfζ)_j`
    pub analytic: f64,
    /// Finite difference of `‖ζ − ξ‖²` in `t`.
    pub numeric: f64,
}

/// Compares the first-variation formula for `d/dt ‖ζ − ξ‖²` with a finite difference.
pub fn first_variation_check(
    space: &NormDescriptor,
    f: &ConvexFunction,
    xi: &Trajectory,
    zeta: &Trajectory,
    t: f64,
) -> Result<FirstVariation> {
    let px = xi.point_at(t)?;
    let pz = zeta.point_at(t)?;
    check_dim(space.dim(), &px)?;
    let u = sub(&pz, &px);
    if u.iter().all(|c| *c == 0.0) {
        return Err(Error::ZeroArgument("curves coincide at t"));
    }
    let g = space.metric_tensor(&u)?;
    if !g.positive_definite {
        return Err(Error::Degenerate(format!(
            "g(ζ − ξ) is not positive-definite (smallest eigenvalue {:e})",
            g.min_eigenvalue
        )));
    }
    let dfx = f.differential(&px)?;
    let dfz = f.differential(&pz)?;
    if dfx.iter().all(|c| *c == 0.0) || dfz.iter().all(|c| *c == 0.0) {
        return Err(Error::ZeroArgument("first variation needs df ≠ 0"));
    }
    let gx = space.dual_metric_tensor(&neg(&dfx))?.matrix;
    let gz = space.dual_metric_tensor(&neg(&dfz))?.matrix;
    let w = sub(&mat_vec(&gx, &dfx), &mat_vec(&gz, &dfz));
    let analytic = 2.0 * dot(&mat_vec(&g.matrix, &u), &w);

    let (lo, hi) = smooth_window(xi, t).and_then(|a| smooth_window(zeta, t).map(|b| (a.0.max(b.0), a.1.min(b.1))))
        .ok_or_else(|| Error::param("t", "t must lie in the domain of both curves"))?;
    let sq = |s: f64| -> Result<f64> { Ok(distance_at(space, xi, zeta, s)?.powi(2)) };
    let h0 = 1e-4 * t.abs().max(1.0);
    let numeric = if t - lo >= h0 && hi - t >= h0 {
        (sq(t + h0)? - sq(t - h0)?) / (2.0 * h0)
    } else if hi - t >= 2.0 * h0 {
        (-3.0 * sq(t)? + 4.0 * sq(t + h0)? - sq(t + 2.0 * h0)?) / (2.0 * h0)
    } else {
        let h = 0.25 * (hi - t).max(t - lo);
        if h <= 0.0 {
            return Err(Error::param("t", "no smooth neighbourhood around t"));
        }
        if hi - t >= t - lo {
            (-3.0 * sq(t)? + 4.0 * sq(t + h)? - sq(t + 2.0 * h)?) / (2.0 * h)
        } else {
            (3.0 * sq(t)? - 4.0 * sq(t - h)? + sq(t - 2.0 * h)?) / (2.0 * h)
        }
    };
    Ok(FirstVariation { analytic, numeric })
}

/// The interval on which `traj` is smooth around `t`.
fn smooth_window(traj: &Trajectory, t: f64) -> Option<(f64, f64)> {
    let end = traj.end_time();
    if !(t >= 0.0 && t <= end) {
        return None;
    }
    if !traj.is_piecewise_linear() {
        return Some((0.0, end));
    }
    let times = traj.times();
    let k = times.partition_point(|s| *s <= t);
    let i = k.saturating_sub(1).min(times.len().saturating_sub(2));
    Some((times[i], times[i + 1]))
}

/// `sup_t ‖ξ_{cf}(t) − ξ_f(ct)‖` over `[0, horizon]`.
pub fn scaling_reparam_residual(
    space: &NormDescriptor,
    f: &ConvexFunction,
    x0: &[f64],
    c: f64,
    horizon: f64,
) -> Result<f64> {
    let scaled = f.scale(c)?;
    let fast = integrate(space, &scaled, x0, horizon, SMOOTH_TOL)?;
    let slow = integrate(space, f, x0, c * horizon, SMOOTH_TOL)?;
    let end = fast.end_time().min(slow.end_time() / c);
    let mut grid: Vec<f64> = (0..DEFAULT_GRID).map(|k| end * k as f64 / (DEFAULT_GRID - 1) as f64).collect();
    grid.extend(fast.times().into_iter().chain(slow.times().into_iter().map(|t| t / c)).filter(|t| *t <= end));
    let mut worst: f64 = 0.0;
    for t in grid {
        let a = fast.point_at(t)?;
        let b = slow.point_at((c * t).min(slow.end_time()))?;
        worst = worst.max(space.eval(&sub(&a, &b)));
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestConstant {
    /// Largest `sup_t d(t)/d(0)` over the grid, a lower bound for any admissible constant.
    pub c_hat: f64,
    pub argmax_params: Params,
    pub evaluated: usize,
}

pub fn estimate_best_constant(space: &NormDescriptor, family: Family, grid: &ParameterGrid) -> Result<BestConstant> {
    let w = search_witness(space, family, grid)?;
    Ok(BestConstant { c_hat: w.max_ratio, argmax_params: w.argmax_params, evaluated: w.evaluated })
}
