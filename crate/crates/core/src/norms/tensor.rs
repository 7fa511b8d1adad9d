//! Metric tensors `g(v) = ½∂²[‖·‖²](v)` and `g*(α) = ½∂²[‖·‖_*²](α)`.
//!
//! ℓp and inner-product spaces use closed forms. The other families take central
//! finite differences of the exact first derivatives (`‖v‖∇‖v‖` and `𝓛(α)`), with
//! step `h = max(|v|₂, 1)·ε^{1/3}` and one Richardson step from `h/2`, then symmetrized.

use super::{NormDescriptor, NormFamily};
use crate::error::{check_dim, Error, Result};
use crate::linalg::euclid;
use nalgebra::DMatrix;
use serde::Serialize;

/// Relative eigenvalue threshold below which a tensor is reported as degenerate.
pub const DEFINITENESS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricTensor {
    #[serde(serialize_with = "crate::io::serialize_matrix")]
    pub matrix: DMatrix<f64>,
    pub min_eigenvalue: f64,
    pub positive_definite: bool,
}

impl MetricTensor {
    fn from_matrix(matrix: DMatrix<f64>) -> Self {
        let eig = matrix.clone().symmetric_eigen();
        let min = eig.eigenvalues.min();
        let max = eig.eigenvalues.amax();
        Self {
            positive_definite: min > DEFINITENESS_TOL * max.max(1.0),
            min_eigenvalue: min,
            matrix,
        }
    }
}

fn fd_step(v: &[f64]) -> f64 {
    euclid(v).max(1.0) * f64::EPSILON.cbrt()
}

fn central_jacobian(point: &[f64], h: f64, grad: &impl Fn(&[f64]) -> Vec<f64>) -> DMatrix<f64> {
    let n = point.len();
    let mut jac = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut plus = point.to_vec();
        let mut minus = point.to_vec();
        plus[j] += h;
        minus[j] -= h;
        let gp = grad(&plus);
        let gm = grad(&minus);
        for i in 0..n {
            jac[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
        }
    }
    jac
}

/// Central differences at `h` and `h/2` combined by one Richardson step, then symmetrized.
fn fd_jacobian(point: &[f64], h: f64, grad: impl Fn(&[f64]) -> Vec<f64>) -> DMatrix<f64> {
    let coarse = central_jacobian(point, h, &grad);
    let fine = central_jacobian(point, 0.5 * h, &grad);
    let jac = (fine * 4.0 - coarse) / 3.0;
    (&jac + jac.transpose()) * 0.5
}

/// Closed-form Hessian of `½‖x‖_p²`; finite wherever every coordinate is nonzero or `p ≥ 2`.
fn lp_half_sq_hessian(x: &[f64], p: f64) -> DMatrix<f64> {
    let n = super::lp_norm(x, p);
    let u: Vec<f64> = x.iter().map(|c| (c.abs() / n).powf(p - 1.0) * c.signum()).collect();
    DMatrix::from_fn(x.len(), x.len(), |i, j| {
        let diag = if i == j { (p - 1.0) * (x[i].abs() / n).powf(p - 2.0) } else { 0.0 };
        diag + (2.0 - p) * u[i] * u[j]
    })
}

impl NormDescriptor {
    /// `g(v)`, the Hessian of `½‖·‖²` at `v ≠ 0`, with a definiteness flag.
    pub fn metric_tensor(&self, v: &[f64]) -> Result<MetricTensor> {
        check_dim(self.dim, v)?;
        if v.iter().all(|c| *c == 0.0) {
            return Err(Error::ZeroArgument("metric tensor at the origin"));
        }
        let h = fd_step(v);
        let kinks = self.kinks(v);
        if !kinks.is_empty() {
            return Err(Error::NonsmoothPoint(format!("kinked coordinates {kinks:?}")));
        }
        match &self.family {
            NormFamily::EuclidPlusL1(l) => {
                if let Some(i) = (0..self.dim).find(|&i| l[i] > 0.0 && v[i].abs() <= 2.0 * h) {
                    return Err(Error::NonsmoothPoint(format!(
                        "coordinate {i} is within the difference stencil of a kink"
                    )));
                }
            }
            NormFamily::Lp(p) => {
                if let Some(i) = (0..self.dim).find(|&i| *p < 2.0 && v[i] == 0.0) {
                    return Err(Error::NonsmoothPoint(format!(
                        "second derivative of the ℓp norm is unbounded at coordinate {i}"
                    )));
                }
                return Ok(MetricTensor::from_matrix(lp_half_sq_hessian(v, *p)));
            }
            NormFamily::InnerProduct(m) => return Ok(MetricTensor::from_matrix(m.clone())),
            _ => {}
        }
        Ok(MetricTensor::from_matrix(fd_jacobian(v, h, |x| self.half_sq_gradient(x))))
    }

    /// `g*(α)`, the Hessian of `½‖·‖_*²` at `α ≠ 0`.
    pub fn dual_metric_tensor(&self, alpha: &[f64]) -> Result<MetricTensor> {
        check_dim(self.dim, alpha)?;
        if alpha.iter().all(|c| *c == 0.0) {
            return Err(Error::ZeroArgument("dual metric tensor at the origin"));
        }
        let h = fd_step(alpha);
        match &self.family {
            NormFamily::InnerProduct(_) => {
                let inv = self.inverse.clone().expect("inner-product inverse");
                return Ok(MetricTensor::from_matrix(inv));
            }
            NormFamily::Lp(p) => {
                if let Some(i) = (0..self.dim).find(|&i| *p > 2.0 && alpha[i] == 0.0) {
                    return Err(Error::NonsmoothPoint(format!(
                        "second derivative of the dual ℓq norm is unbounded at coordinate {i}"
                    )));
                }
                return Ok(MetricTensor::from_matrix(lp_half_sq_hessian(alpha, *p / (*p - 1.0))));
            }
            NormFamily::EuclidPlusL1(l) => {
                // 𝓛 switches formula where |αᵢ| = ‖α‖_* λᵢ
                let t = self.dual_eval(alpha);
                let lmax = l.iter().fold(0.0f64, |a, b| a.max(*b));
                let band = 4.0 * h * (1.0 + lmax) * (1.0 + t);
                if let Some(i) =
                    (0..self.dim).find(|&i| l[i] > 0.0 && (alpha[i].abs() - t * l[i]).abs() <= band)
                {
                    return Err(Error::NonsmoothPoint(format!(
                        "covector coordinate {i} is at a face boundary of the dual ball"
                    )));
                }
            }
            _ => {}
        }
        Ok(MetricTensor::from_matrix(fd_jacobian(alpha, h, |a| self.legendre_unchecked(a))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn lp_closed_form_matches_differences() {
        for (p, x) in [(4.0, [0.8, -0.3]), (1.5, [0.6, 1.1]), (3.0, [-1.2, 0.4])] {
            let s = NormDescriptor::lp(p, 2).unwrap();
            let fd = fd_jacobian(&x, fd_step(&x), |y| s.half_sq_gradient(y));
            assert!((fd - lp_half_sq_hessian(&x, p)).amax() < 1e-7);
        }
    }

    #[test]
    fn inner_product_tensor_is_the_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let s = NormDescriptor::inner_product(m.clone()).unwrap();
        let g = s.metric_tensor(&[0.3, -4.0]).unwrap();
        assert_eq!(g.matrix, m);
        assert!(g.positive_definite);
        let e = NormDescriptor::euclidean(2).unwrap();
        let gs = e.dual_metric_tensor(&[1.0, 2.0]).unwrap();
        assert_eq!(gs.matrix, DMatrix::identity(2, 2));
    }

    #[test]
    fn lp4_tensor_examples() {
        let s = NormDescriptor::lp(4.0, 2).unwrap();
        let g = s.metric_tensor(&[1.0, 1.0]).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, -0.5, -0.5, 1.0]) * 2f64.sqrt();
        assert!((&g.matrix - &expected).amax() < 1e-8, "{}", g.matrix);
        assert!((&g.matrix - lp_half_sq_hessian(&[1.0, 1.0], 4.0)).amax() < 1e-8);
        assert!(g.positive_definite);

        let g = s.metric_tensor(&[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(g.matrix[(0, 0)], 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(g.matrix[(1, 1)], 0.0, epsilon = 1e-8);
        assert!(!g.positive_definite);

        let gs = s.dual_metric_tensor(&[1.0, 1.0]).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]) * (2.0 * 2f64.sqrt() / 3.0);
        assert!((&gs.matrix - &expected).amax() < 1e-8, "{}", gs.matrix);
        assert_abs_diff_eq!(gs.matrix[(0, 1)], 0.471405, epsilon = 1e-6);
        // direct Hessian of the ℓ_{4/3} squared norm
        assert!((&gs.matrix - lp_half_sq_hessian(&[1.0, 1.0], 4.0 / 3.0)).amax() < 1e-8);

        let e2 = NormDescriptor::lp(2.0, 2).unwrap();
        let gs = e2.dual_metric_tensor(&[0.3, -0.7]).unwrap();
        assert!((&gs.matrix - DMatrix::identity(2, 2)).amax() < 1e-9);
    }

    #[test]
    fn tensors_are_mutually_inverse() {
        let s = NormDescriptor::lp(4.0, 2).unwrap();
        let alpha = [0.7, -0.2];
        let gs = s.dual_metric_tensor(&alpha).unwrap();
        let g = s.metric_tensor(&s.legendre(&alpha).unwrap()).unwrap();
        let prod = &gs.matrix * &g.matrix;
        assert!((prod - DMatrix::identity(2, 2)).amax() < 1e-6);
    }

    #[test]
    fn singular_inputs_are_rejected() {
        let l1 = NormDescriptor::euclid_plus_l1(vec![0.0, 1.0]).unwrap();
        assert!(matches!(l1.metric_tensor(&[1.0, 0.0]), Err(Error::NonsmoothPoint(_))));
        assert!(matches!(l1.metric_tensor(&[1.0, 1e-7]), Err(Error::NonsmoothPoint(_))));
        assert!(l1.metric_tensor(&[1.0, 0.3]).unwrap().positive_definite);
        let s = NormDescriptor::lp(4.0, 2).unwrap();
        assert!(matches!(s.metric_tensor(&[0.0, 0.0]), Err(Error::ZeroArgument(_))));
        assert!(matches!(s.dual_metric_tensor(&[1.0, 0.0]), Err(Error::NonsmoothPoint(_))));
    }
}
