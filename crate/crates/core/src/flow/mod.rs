//! Gradient curves `ξ̇ = ∇[−f](ξ)`.
//!
//! Max-of-affine functions are integrated exactly, one linear segment per
//! active-set change. Smooth functions go through an adaptive Dormand–Prince
//! 5(4) scheme with dense output.

mod edi;
mod piecewise;
mod smooth;

pub use edi::{edi_residual, EdiReport};
pub use piecewise::{integrate_max_affine, MAX_EVENTS};
pub use smooth::integrate_smooth;

use crate::error::{check_dim, Error, Result};
use crate::functions::{face_of, min_dual_in_hull, ConvexFunction};
use crate::linalg::{dot, neg};
use crate::norms::NormDescriptor;
use serde::{Deserialize, Serialize};

/// `‖−α*‖_*` at or below this counts as a stationary point.
pub const STATIONARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    HorizonReached,
    Stationary,
    StepFloor,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Breakpoint {
    pub time: f64,
    pub point: Vec<f64>,
    pub velocity: Vec<f64>,
}

/// Hermite-type dense output of one accepted step on `[t, t + h]`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DenseStep {
    pub t: f64,
    pub h: f64,
    pub r: [Vec<f64>; 5],
}

impl DenseStep {
    pub(crate) fn constant(t: f64, h: f64, x: &[f64]) -> Self {
        let z = vec![0.0; x.len()];
        Self { t, h, r: [x.to_vec(), z.clone(), z.clone(), z.clone(), z] }
    }

    fn theta(&self, t: f64) -> f64 {
        ((t - self.t) / self.h).clamp(0.0, 1.0)
    }

    pub(crate) fn point(&self, t: f64) -> Vec<f64> {
        let th = self.theta(t);
        let [r1, r2, r3, r4, r5] = &self.r;
        (0..r1.len())
            .map(|i| r1[i] + th * (r2[i] + (1.0 - th) * (r3[i] + th * (r4[i] + (1.0 - th) * r5[i]))))
            .collect()
    }

    pub(crate) fn derivative(&self, t: f64) -> Vec<f64> {
        let th = self.theta(t);
        let [_, r2, r3, r4, r5] = &self.r;
        (0..r2.len())
            .map(|i| {
                let q = r3[i] + th * (r4[i] + (1.0 - th) * r5[i]);
                let dq = r4[i] + (1.0 - 2.0 * th) * r5[i];
                (r2[i] + (1.0 - 2.0 * th) * q + th * (1.0 - th) * dq) / self.h
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Path {
    /// Breakpoint `i` carries the velocity on `[tᵢ, tᵢ₊₁)`.
    Linear,
    /// Step `i` spans `[tᵢ, tᵢ₊₁]`.
    Dense(Vec<DenseStep>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    breakpoints: Vec<Breakpoint>,
    path: Path,
    horizon: f64,
    status: Status,
    space: Option<NormDescriptor>,
    function: Option<ConvexFunction>,
}

impl Trajectory {
    pub(crate) fn linear(
        breakpoints: Vec<Breakpoint>,
        horizon: f64,
        status: Status,
        space: &NormDescriptor,
        function: &ConvexFunction,
    ) -> Self {
        Self {
            breakpoints,
            path: Path::Linear,
            horizon,
            status,
            space: Some(space.clone()),
            function: Some(function.clone()),
        }
    }

    pub(crate) fn dense(
        breakpoints: Vec<Breakpoint>,
        steps: Vec<DenseStep>,
        horizon: f64,
        status: Status,
        space: &NormDescriptor,
        function: &ConvexFunction,
    ) -> Self {
        Self {
            breakpoints,
            path: Path::Dense(steps),
            horizon,
            status,
            space: Some(space.clone()),
            function: Some(function.clone()),
        }
    }

    /// A test curve through `points` at `times`, linear in between.
    pub fn polyline(times: Vec<f64>, points: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() < 2 || times.len() != points.len() {
            return Err(Error::param("times", "need at least two times, one per point"));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("times", "must start at 0 and increase strictly"));
        }
        let n = points[0].len();
        for p in &points {
            check_dim(n, p)?;
        }
        let mut breakpoints: Vec<Breakpoint> = Vec::with_capacity(times.len());
        for i in 0..times.len() {
            let j = i.min(times.len() - 2);
            let dt = times[j + 1] - times[j];
            let velocity = points[j + 1].iter().zip(&points[j]).map(|(b, a)| (b - a) / dt).collect();
            breakpoints.push(Breakpoint { time: times[i], point: points[i].clone(), velocity });
        }
        let horizon = *times.last().unwrap();
        Ok(Self {
            breakpoints,
            path: Path::Linear,
            horizon,
            status: Status::HorizonReached,
            space: None,
            function: None,
        })
    }

    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.breakpoints
    }

    pub fn times(&self) -> Vec<f64> {
        self.breakpoints.iter().map(|b| b.time).collect()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Last time at which the curve is defined; below the horizon only after a step-size floor.
    pub fn end_time(&self) -> f64 {
        self.breakpoints.last().map_or(0.0, |b| b.time)
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn dim(&self) -> usize {
        self.breakpoints[0].point.len()
    }

    pub fn is_piecewise_linear(&self) -> bool {
        matches!(self.path, Path::Linear)
    }

    pub fn space(&self) -> Option<&NormDescriptor> {
        self.space.as_ref()
    }

    pub fn function(&self) -> Option<&ConvexFunction> {
        self.function.as_ref()
    }

    fn check_time(&self, t: f64) -> Result<f64> {
        let end = self.end_time();
        let slack = 1e-12 * end.max(1.0);
        if !(t >= -slack && t <= end + slack) {
            return Err(Error::TimeOutOfRange { t, end });
        }
        Ok(t.clamp(0.0, end))
    }

    /// Index `i` of the segment `[tᵢ, tᵢ₊₁)` containing `t`, the last one for `t = end`.
    fn segment_index(&self, t: f64) -> usize {
        let k = self.breakpoints.partition_point(|b| b.time <= t);
        k.saturating_sub(1).min(self.breakpoints.len().saturating_sub(2))
    }

    pub fn point_at(&self, t: f64) -> Result<Vec<f64>> {
        let t = self.check_time(t)?;
        Ok(self.eval_point(t))
    }

    pub(crate) fn eval_point(&self, t: f64) -> Vec<f64> {
        if self.breakpoints.len() == 1 {
            return self.breakpoints[0].point.clone();
        }
        let i = self.segment_index(t);
        match &self.path {
            Path::Linear => {
                let b = &self.breakpoints[i];
                let dt = t - b.time;
                b.point.iter().zip(&b.velocity).map(|(x, v)| x + dt * v).collect()
            }
            Path::Dense(steps) => steps[i].point(t),
        }
    }

    /// Forward velocity at `t ∈ [0, end)`.
    pub fn velocity_at(&self, t: f64) -> Result<Vec<f64>> {
        let end = self.end_time();
        if !(t >= 0.0 && t < end) {
            return Err(Error::TimeOutOfRange { t, end });
        }
        Ok(self.eval_velocity(t))
    }

    pub(crate) fn eval_velocity(&self, t: f64) -> Vec<f64> {
        if self.breakpoints.len() == 1 {
            return vec![0.0; self.dim()];
        }
        let i = self.segment_index(t);
        match &self.path {
            Path::Linear => self.breakpoints[i].velocity.clone(),
            Path::Dense(steps) => steps[i].derivative(t),
        }
    }

    /// `(t_a, t_b)` for each segment or integration step.
    pub(crate) fn pieces(&self) -> Vec<(f64, f64)> {
        self.breakpoints.windows(2).map(|w| (w[0].time, w[1].time)).collect()
    }

    /// Samples `(t, ξ(t))` on `count` uniform times in `[0, end]`.
    pub fn samples(&self, count: usize) -> Vec<(f64, Vec<f64>)> {
        let end = self.end_time();
        let count = count.max(2);
        (0..count)
            .map(|k| {
                let t = if k + 1 == count { end } else { end * k as f64 / (count - 1) as f64 };
                (t, self.eval_point(t))
            })
            .collect()
    }
}

#[derive(Serialize)]
struct TrajectoryDoc<'a> {
    space: Option<String>,
    function: Option<String>,
    horizon: f64,
    end_time: f64,
    breakpoints: &'a [Breakpoint],
    status: Status,
}

impl Serialize for Trajectory {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        TrajectoryDoc {
            space: self.space.as_ref().map(|s| s.to_string()),
            function: self.function.as_ref().map(|f| f.to_string()),
            horizon: self.horizon,
            end_time: self.end_time(),
            breakpoints: &self.breakpoints,
            status: self.status,
        }
        .serialize(serializer)
    }
}

/// `∇[−f](x) = 𝓛(−α*)` with `α*` the minimal-dual-norm subgradient.
pub fn steepest_velocity(space: &NormDescriptor, f: &ConvexFunction, x: &[f64]) -> Result<Vec<f64>> {
    let alpha = f.min_dual_subgradient(x, space)?;
    Ok(space.legendre_unchecked(&neg(&alpha)))
}

/// `|∂f|(x) = ‖−α*‖_*`.
pub fn local_slope(space: &NormDescriptor, f: &ConvexFunction, x: &[f64]) -> Result<f64> {
    let alpha = f.min_dual_subgradient(x, space)?;
    Ok(space.dual_eval(&neg(&alpha)))
}

/// One-sided slope `lim_{ε↓0} |∂f|(x + εd)`; equals [`local_slope`] off the kinks of `f`.
pub(crate) fn directional_slope(space: &NormDescriptor, f: &ConvexFunction, x: &[f64], dir: &[f64]) -> Result<f64> {
    let Some(pieces) = f.flat_pieces() else {
        return local_slope(space, f, x);
    };
    let face = face_of(&pieces, x, None);
    let rates: Vec<f64> = face.vertices.iter().map(|g| dot(g, dir)).collect();
    let top = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let band = 1e-9 * rates.iter().fold(1.0f64, |m, r| m.max(r.abs()));
    let kept: Vec<Vec<f64>> =
        face.vertices.into_iter().zip(&rates).filter(|(_, r)| **r >= top - band).map(|(g, _)| g).collect();
    Ok(space.dual_eval(&neg(&min_dual_in_hull(space, &kept))))
}

/// Forward metric derivative `‖ξ̇(t)‖`.
pub fn metric_derivative(space: &NormDescriptor, traj: &Trajectory, t: f64) -> Result<f64> {
    check_dim(space.dim(), &traj.breakpoints[0].point)?;
    Ok(space.eval(&traj.velocity_at(t)?))
}

/// Exact integration for piecewise-affine `f`, Dormand–Prince otherwise.
pub fn integrate(
    space: &NormDescriptor,
    f: &ConvexFunction,
    x0: &[f64],
    horizon: f64,
    tol: f64,
) -> Result<Trajectory> {
    if f.is_piecewise_affine() {
        integrate_max_affine(space, f, x0, horizon)
    } else {
        integrate_smooth(space, f, x0, horizon, tol)
    }
}

pub(crate) fn check_horizon(horizon: f64) -> Result<()> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::param("T", "horizon must be positive and finite"));
    }
    Ok(())
}
