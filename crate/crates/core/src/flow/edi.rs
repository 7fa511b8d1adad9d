use super::{directional_slope, local_slope, Trajectory};
use crate::linalg::neg;
use crate::error::{check_dim, Error, Result};
use crate::functions::ConvexFunction;
use crate::norms::NormDescriptor;
use serde::Serialize;

const MIN_PANELS: usize = 64;
const MAX_PANELS: usize = 1 << 16;
const QUAD_TOL: f64 = 1e-10;

/// Both sides of `f(ξ(t)) ≥ f(ξ(s)) − ½∫|ξ̇|² − ½∫|∂f|²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdiReport {
    pub s: f64,
    pub t: f64,
    pub left: f64,
    pub right: f64,
    pub residual: f64,
    /// `½∫|ξ̇|²`
    pub kinetic: f64,
    /// `½∫|∂f|²`
    pub slope_term: f64,
    pub rule: &'static str,
    pub panels: usize,
    /// Smallest panel width used.
    pub step: f64,
}

/// Evaluates the energy-dissipation residual of `traj` on `[s, t]`.
///
/// Piecewise-linear curves are integrated segment by segment, with the slope taken
/// as its one-sided limit along the segment, so kinks of `f` met at segment ends
/// do not leak into the quadrature. Dense curves are integrated over
/// the whole interval.
pub fn edi_residual(
    space: &NormDescriptor,
    f: &ConvexFunction,
    traj: &Trajectory,
    s: f64,
    t: f64,
) -> Result<EdiReport> {
    check_dim(space.dim(), &traj.breakpoints()[0].point)?;
    check_dim(f.dim(), &traj.breakpoints()[0].point)?;
    let end = traj.end_time();
    if !(s >= 0.0 && s < t) {
        return Err(Error::param("s", "need 0 ≤ s < t"));
    }
    if t > end * (1.0 + 1e-12) {
        return Err(Error::TimeOutOfRange { t, end });
    }
    let t = t.min(end);

    let intervals: Vec<(f64, f64)> = if traj.is_piecewise_linear() {
        traj.pieces()
            .into_iter()
            .filter_map(|(a, b)| {
                let (lo, hi) = (a.max(s), b.min(t));
                (hi > lo).then_some((lo, hi))
            })
            .collect()
    } else {
        vec![(s, t)]
    };

    let mut kinetic = 0.0;
    let mut slope_term = 0.0;
    let mut panels = 0;
    let mut step = f64::INFINITY;
    for (a, b) in intervals {
        let linear = traj.is_piecewise_linear();
        let integrand = |tau: f64| -> Result<[f64; 2]> {
            let v = traj.eval_velocity(if linear { 0.5 * (a + b) } else { tau });
            let speed = space.eval(&v);
            let x = traj.eval_point(tau);
            let slope = if !linear {
                local_slope(space, f, &x)?
            } else if tau >= b {
                directional_slope(space, f, &x, &neg(&v))?
            } else {
                directional_slope(space, f, &x, &v)?
            };
            Ok([0.5 * speed * speed, 0.5 * slope * slope])
        };
        let (val, used) = simpson(a, b, integrand)?;
        kinetic += val[0];
        slope_term += val[1];
        panels += used;
        step = step.min((b - a) / used as f64);
    }

    let left = f.value(&traj.eval_point(t));
    let right = f.value(&traj.eval_point(s)) - kinetic - slope_term;
    Ok(EdiReport {
        s,
        t,
        left,
        right,
        residual: left - right,
        kinetic,
        slope_term,
        rule: "adaptive composite Simpson",
        panels,
        step,
    })
}

/// Composite Simpson, doubling the panel count until successive estimates agree.
fn simpson(a: f64, b: f64, g: impl Fn(f64) -> Result<[f64; 2]>) -> Result<([f64; 2], usize)> {
    let mut n = MIN_PANELS;
    let h0 = (b - a) / n as f64;
    let mut ends = [0.0; 2];
    let mut odd = [0.0; 2];
    let mut even = [0.0; 2];
    let ga = g(a)?;
    let gb = g(b)?;
    for c in 0..2 {
        ends[c] = ga[c] + gb[c];
    }
    for k in 1..n {
        let v = g(a + k as f64 * h0)?;
        for c in 0..2 {
            if k % 2 == 1 {
                odd[c] += v[c];
            } else {
                even[c] += v[c];
            }
        }
    }
    let estimate = |h: f64, odd: &[f64; 2], even: &[f64; 2]| -> [f64; 2] {
        [0, 1].map(|c| h / 3.0 * (ends[c] + 4.0 * odd[c] + 2.0 * even[c]))
    };
    let mut prev = estimate(h0, &odd, &even);
    loop {
        if n >= MAX_PANELS {
            return Ok((prev, n));
        }
        // old nodes all become even nodes of the refined rule
        for c in 0..2 {
            even[c] += odd[c];
            odd[c] = 0.0;
        }
        let h = (b - a) / (2 * n) as f64;
        for k in (1..2 * n).step_by(2) {
            let v = g(a + k as f64 * h)?;
            for c in 0..2 {
                odd[c] += v[c];
            }
        }
        n *= 2;
        let next = estimate(h, &odd, &even);
        if (0..2).all(|c| (next[c] - prev[c]).abs() < QUAD_TOL) {
            return Ok((next, n));
        }
        prev = next;
    }
}
