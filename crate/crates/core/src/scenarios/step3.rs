use crate::error::{Error, Result};
use crate::norms::NormDescriptor;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangencySample {
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    /// `d[‖·‖]_w(v)`
    pub derivative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangencyScan {
    pub samples: Vec<TangencySample>,
    /// Largest `|d[‖·‖]_w(v)|` over the scan.
    pub score: f64,
}

/// Scans unit vectors `v` and the unit vectors `w` spanning the tangent line at `v`.
///
/// In coordinates where the support line at `v` is `x¹ = 1`, `w` lies on the unit
/// sphere and on `x¹ = 0`; the two choices `±k/‖±k‖` with `k ⊥ ∇‖·‖(v)` are both
/// reported.
pub fn step3_tangency_scan(space: &NormDescriptor, samples: usize) -> Result<TangencyScan> {
    if space.dim() != 2 {
        return Err(Error::NotApplicable("the tangency scan needs a planar space".into()));
    }
    if !space.is_smooth() {
        return Err(Error::NotApplicable(format!("the tangency scan needs a smooth norm, got {space}")));
    }
    if samples == 0 {
        return Err(Error::Empty("tangency scan samples"));
    }
    let mut out = Vec::with_capacity(2 * samples);
    for j in 0..samples {
        let theta = std::f64::consts::TAU * j as f64 / samples as f64;
        let u = [theta.cos(), theta.sin()];
        let nu = space.eval(&u);
        let v = vec![u[0] / nu, u[1] / nu];
        let grad = space.gradient(&v)?;
        for sign in [1.0, -1.0] {
            let k = [-sign * grad[1], sign * grad[0]];
            let nk = space.eval(&k);
            let w = vec![k[0] / nk, k[1] / nk];
            let derivative = space.norm_derivative(&w, &v)?;
            out.push(TangencySample { v: v.clone(), w, derivative });
        }
    }
    let score = out.iter().map(|s| s.derivative.abs()).fold(0.0, f64::max);
    Ok(TangencyScan { samples: out, score })
}
