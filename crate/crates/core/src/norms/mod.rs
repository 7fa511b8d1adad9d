//! Possibly asymmetric norms on ℝⁿ.
//!
//! A [`NormDescriptor`] is one of four parameterized families. Every family is
//! strictly convex, so the squared dual norm is differentiable and the
//! Legendre transform is single-valued. The families are
//!
//! * `inner_product(M)`: `‖x‖ = √(xᵀMx)` with `M` symmetric positive-definite,
//! * `lp(p)`: `‖x‖ = (Σ|xᵢ|ᵖ)^{1/p}` with `1 < p < ∞`,
//! * `euclid_plus_l1(λ)`: `‖x‖ = |x|₂ + Σλᵢ|xᵢ|`, nonsmooth where `λᵢ > 0, xᵢ = 0`,
//! * `euclid_plus_linear(β)`: `‖x‖ = |x|₂ + β·x` with `|β|₂ < 1`, smooth and asymmetric.
//!
//! The mini-grammar accepted by [`NormDescriptor::from_str`] is
//! `euclid[:n=k]`, `spd:<matrix>`, `lp:p=<float>[;n=k]`,
//! `euclid_l1:lambda=<tuple>` and `asym:beta=<tuple>`.

mod axioms;
mod dual;
mod tensor;

pub use axioms::{AxiomCheck, AxiomReport, AsymmetryWitness};
pub use tensor::MetricTensor;

use crate::error::{check_dim, Error, Result};
use crate::grammar::{fmt_matrix, fmt_tuple, parse_matrix, parse_options, parse_tuple};
use crate::linalg::{dot, euclid};
use nalgebra::DMatrix;
use std::fmt;
use std::str::FromStr;

/// Relative band inside which a coordinate counts as sitting on a kink of `euclid_plus_l1`.
pub const KINK_BAND: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum NormFamily {
    InnerProduct(DMatrix<f64>),
    Lp(f64),
    EuclidPlusL1(Vec<f64>),
    EuclidPlusLinear(Vec<f64>),
}

/// A parameterized norm on ℝⁿ. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct NormDescriptor {
    dim: usize,
    family: NormFamily,
    inverse: Option<DMatrix<f64>>,
}

impl NormDescriptor {
    pub fn euclidean(n: usize) -> Result<Self> {
        Self::inner_product(DMatrix::identity(n, n))
    }

    pub fn inner_product(m: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if n == 0 || m.ncols() != n {
            return Err(Error::param("M", "matrix must be square and nonempty"));
        }
        let scale = m.amax().max(1.0);
        for i in 0..n {
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::param("M", "matrix must be symmetric"));
                }
            }
        }
        let sym = (&m + m.transpose()) * 0.5;
        let chol = sym
            .clone()
            .cholesky()
            .ok_or_else(|| Error::param("M", "matrix must be positive-definite"))?;
        let inverse = chol.inverse();
        Ok(Self {
            dim: n,
            family: NormFamily::InnerProduct(sym),
            inverse: Some(inverse),
        })
    }

    pub fn lp(p: f64, n: usize) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::param("p", "must lie in (1, ∞)"));
        }
        if n == 0 {
            return Err(Error::param("n", "dimension must be positive"));
        }
        Ok(Self {
            dim: n,
            family: NormFamily::Lp(p),
            inverse: None,
        })
    }

    pub fn euclid_plus_l1(lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::param("lambda", "dimension must be positive"));
        }
        if lambda.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
            return Err(Error::param("lambda", "weights must be finite and nonnegative"));
        }
        Ok(Self {
            dim: lambda.len(),
            family: NormFamily::EuclidPlusL1(lambda),
            inverse: None,
        })
    }

    pub fn euclid_plus_linear(beta: Vec<f64>) -> Result<Self> {
        if beta.is_empty() {
            return Err(Error::param("beta", "dimension must be positive"));
        }
        if beta.iter().any(|b| !b.is_finite()) || euclid(&beta) >= 1.0 {
            return Err(Error::param("beta", "Euclidean length must be below 1"));
        }
        Ok(Self {
            dim: beta.len(),
            family: NormFamily::EuclidPlusLinear(beta),
            inverse: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> &NormFamily {
        &self.family
    }

    pub fn is_inner_product(&self) -> bool {
        match &self.family {
            NormFamily::InnerProduct(_) => true,
            NormFamily::Lp(p) => *p == 2.0,
            NormFamily::EuclidPlusL1(l) => l.iter().all(|x| *x == 0.0),
            NormFamily::EuclidPlusLinear(b) => b.iter().all(|x| *x == 0.0),
        }
    }

    /// Family-level symmetry: `‖−x‖ = ‖x‖` for all `x`.
    pub fn is_symmetric(&self) -> bool {
        match &self.family {
            NormFamily::EuclidPlusLinear(b) => b.iter().all(|x| *x == 0.0),
            _ => true,
        }
    }

    /// True when the norm is differentiable on ℝⁿ∖{0}.
    pub fn is_smooth(&self) -> bool {
        match &self.family {
            NormFamily::EuclidPlusL1(l) => l.iter().all(|x| *x == 0.0),
            _ => true,
        }
    }

    pub(crate) fn gram_inverse(&self) -> Option<DMatrix<f64>> {
        match &self.family {
            NormFamily::InnerProduct(_) => self.inverse.clone(),
            _ if self.is_inner_product() => Some(DMatrix::identity(self.dim, self.dim)),
            _ => None,
        }
    }

    /// `‖x‖`.
    pub fn norm(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x)?;
        Ok(self.eval(x))
    }

    pub(crate) fn eval(&self, x: &[f64]) -> f64 {
        match &self.family {
            NormFamily::InnerProduct(m) => quad_form(m, x).max(0.0).sqrt(),
            NormFamily::Lp(p) => lp_norm(x, *p),
            NormFamily::EuclidPlusL1(l) => {
                euclid(x) + l.iter().zip(x).map(|(w, xi)| w * xi.abs()).sum::<f64>()
            }
            NormFamily::EuclidPlusLinear(b) => euclid(x) + dot(b, x),
        }
    }

    /// One-sided directional derivative `lim_{t→0⁺} (‖x+tv‖ − ‖x‖)/t` at `x ≠ 0`.
    pub fn norm_derivative(&self, x: &[f64], v: &[f64]) -> Result<f64> {
        check_dim(self.dim, x)?;
        check_dim(self.dim, v)?;
        if x.iter().all(|c| *c == 0.0) {
            return Err(Error::ZeroArgument("norm derivative at the origin"));
        }
        Ok(match &self.family {
            NormFamily::EuclidPlusL1(l) => {
                let e = euclid(x);
                let band = KINK_BAND * e.max(1.0);
                let mut d = dot(x, v) / e;
                for i in 0..self.dim {
                    if l[i] > 0.0 {
                        d += if x[i].abs() <= band {
                            l[i] * v[i].abs()
                        } else {
                            l[i] * x[i].signum() * v[i]
                        };
                    }
                }
                d
            }
            _ => dot(&self.gradient_unchecked(x), v),
        })
    }

    /// Indices of kinked coordinates of `x` (always empty for smooth families).
    pub fn kinks(&self, x: &[f64]) -> Vec<usize> {
        match &self.family {
            NormFamily::EuclidPlusL1(l) => {
                let band = KINK_BAND * euclid(x).max(1.0);
                (0..self.dim)
                    .filter(|&i| l[i] > 0.0 && x[i].abs() <= band)
                    .collect()
            }
            _ => Vec::new(),
        }
    }

    /// Gradient of `‖·‖` at a point where it is differentiable.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x)?;
        if x.iter().all(|c| *c == 0.0) {
            return Err(Error::ZeroArgument("norm gradient at the origin"));
        }
        let kinks = self.kinks(x);
        if !kinks.is_empty() {
            return Err(Error::NonsmoothPoint(format!("kinked coordinates {kinks:?}")));
        }
        Ok(self.gradient_unchecked(x))
    }

    pub(crate) fn gradient_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let n = self.eval(x);
        match &self.family {
            NormFamily::InnerProduct(m) => {
                let mx = mat_vec(m, x);
                mx.into_iter().map(|c| c / n).collect()
            }
            NormFamily::Lp(p) => x
                .iter()
                .map(|xi| (xi.abs() / n).powf(p - 1.0) * xi.signum())
                .collect(),
            NormFamily::EuclidPlusL1(l) => {
                let e = euclid(x);
                x.iter()
                    .zip(l)
                    .map(|(xi, w)| xi / e + if *xi == 0.0 { 0.0 } else { w * xi.signum() })
                    .collect()
            }
            NormFamily::EuclidPlusLinear(b) => {
                let e = euclid(x);
                x.iter().zip(b).map(|(xi, bi)| xi / e + bi).collect()
            }
        }
    }

    /// Gradient of `½‖·‖²`, i.e. `‖x‖∇‖x‖`; zero at the origin.
    pub(crate) fn half_sq_gradient(&self, x: &[f64]) -> Vec<f64> {
        if x.iter().all(|c| *c == 0.0) {
            return vec![0.0; self.dim];
        }
        let n = self.eval(x);
        self.gradient_unchecked(x).into_iter().map(|g| g * n).collect()
    }

    /// `‖x+y‖² + ‖x−y‖² − 2‖x‖² − 2‖y‖²`, identically zero exactly for inner-product norms.
    pub fn parallelogram_defect(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim(self.dim, x)?;
        check_dim(self.dim, y)?;
        let s: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
        let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        Ok(self.eval(&s).powi(2) + self.eval(&d).powi(2)
            - 2.0 * self.eval(x).powi(2)
            - 2.0 * self.eval(y).powi(2))
    }
}

fn quad_form(m: &DMatrix<f64>, x: &[f64]) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += m[(i, j)] * x[j];
        }
        s += x[i] * row;
    }
    s
}

pub(crate) fn mat_vec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum())
        .collect()
}

pub(crate) fn lp_norm(x: &[f64], p: f64) -> f64 {
    let m = x.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if m == 0.0 {
        return 0.0;
    }
    m * x.iter().map(|c| (c.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

impl fmt::Display for NormDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            NormFamily::InnerProduct(m) => {
                if *m == DMatrix::identity(self.dim, self.dim) {
                    if self.dim == 2 {
                        write!(f, "euclid")
                    } else {
                        write!(f, "euclid:n={}", self.dim)
                    }
                } else {
                    write!(f, "spd:{}", fmt_matrix(m))
                }
            }
            NormFamily::Lp(p) => {
                if self.dim == 2 {
                    write!(f, "lp:p={p}")
                } else {
                    write!(f, "lp:p={p};n={}", self.dim)
                }
            }
            NormFamily::EuclidPlusL1(l) => write!(f, "euclid_l1:lambda={}", fmt_tuple(l)),
            NormFamily::EuclidPlusLinear(b) => write!(f, "asym:beta={}", fmt_tuple(b)),
        }
    }
}

fn parse_dim(s: &str, v: &str) -> Result<usize> {
    let n: usize = v
        .parse()
        .map_err(|_| Error::parse(s, "n must be a positive integer"))?;
    if n == 0 {
        return Err(Error::parse(s, "n must be positive"));
    }
    Ok(n)
}

impl FromStr for NormDescriptor {
    type Err = Error;

    /// Parses the norm mini-grammar. `euclid` and `lp` default to dimension 2.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (head, rest) = t.split_once(':').unwrap_or((t, ""));
        let wrap = |e: Error| match e {
            Error::InvalidParameter { name, reason } => {
                Error::parse(s, format!("{name}: {reason}"))
            }
            other => other,
        };
        match head.trim() {
            "euclid" => {
                let mut n = 2;
                for (k, v) in parse_options(rest)? {
                    match k {
                        "n" => n = parse_dim(s, v)?,
                        _ => return Err(Error::parse(s, format!("unknown option `{k}`"))),
                    }
                }
                Self::euclidean(n).map_err(wrap)
            }
            "spd" => {
                let body = rest.trim();
                let body = body.strip_prefix("M=").unwrap_or(body);
                let m = parse_matrix(body)?;
                Self::inner_product(m).map_err(wrap)
            }
            "lp" => {
                let mut p = None;
                let mut n = 2;
                for (k, v) in parse_options(rest)? {
                    match k {
                        "p" => p = Some(crate::grammar::parse_f64(v)?),
                        "n" => n = parse_dim(s, v)?,
                        _ => return Err(Error::parse(s, format!("unknown option `{k}`"))),
                    }
                }
                let p = p.ok_or_else(|| Error::parse(s, "missing p"))?;
                Self::lp(p, n).map_err(wrap)
            }
            "euclid_l1" => {
                let opts = parse_options(rest)?;
                match opts.as_slice() {
                    [("lambda", v)] => Self::euclid_plus_l1(parse_tuple(v)?).map_err(wrap),
                    _ => Err(Error::parse(s, "expected lambda=<tuple>")),
                }
            }
            "asym" => {
                let opts = parse_options(rest)?;
                match opts.as_slice() {
                    [("beta", v)] => Self::euclid_plus_linear(parse_tuple(v)?).map_err(wrap),
                    _ => Err(Error::parse(s, "expected beta=<tuple>")),
                }
            }
            other => Err(Error::parse(s, format!("unknown norm family `{other}`"))),
        }
    }
}

impl serde::Serialize for NormDescriptor {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for NormDescriptor {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lp4() -> NormDescriptor {
        NormDescriptor::lp(4.0, 2).unwrap()
    }

    #[test]
    fn lp_evaluation() {
        assert_abs_diff_eq!(lp4().norm(&[1.0, 1.0]).unwrap(), 2f64.powf(0.25), epsilon = 1e-15);
        assert_abs_diff_eq!(lp4().norm(&[1.0, 1.0]).unwrap(), 1.189207, epsilon = 1e-6);
    }

    #[test]
    fn linear_perturbation_is_asymmetric() {
        let s = NormDescriptor::euclid_plus_linear(vec![0.5, 0.0]).unwrap();
        assert_abs_diff_eq!(s.norm(&[-1.0, 0.0]).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.norm(&[1.0, 0.0]).unwrap(), 1.5, epsilon = 1e-15);
        assert!(!s.is_symmetric());
    }

    #[test]
    fn origin_has_zero_norm() {
        for s in ["euclid", "lp:p=3", "euclid_l1:lambda=(0,1)", "asym:beta=(0.3,-0.2)"] {
            let space: NormDescriptor = s.parse().unwrap();
            assert_eq!(space.norm(&[0.0, 0.0]).unwrap(), 0.0);
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        assert!(matches!(
            lp4().norm(&[1.0, 2.0, 3.0]),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn constructors_validate() {
        assert!(NormDescriptor::lp(1.0, 2).is_err());
        assert!(NormDescriptor::euclid_plus_linear(vec![0.8, 0.6]).is_err());
        assert!(NormDescriptor::euclid_plus_l1(vec![-0.1, 0.0]).is_err());
        let not_pd = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(NormDescriptor::inner_product(not_pd).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(NormDescriptor::inner_product(asym).is_err());
    }

    #[test]
    fn norm_derivative_examples() {
        let e = NormDescriptor::euclidean(2).unwrap();
        assert_abs_diff_eq!(e.norm_derivative(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);

        let a: f64 = 0.5;
        let r = (1.0 + a.powi(4)).powf(-0.25);
        assert_abs_diff_eq!(r, 0.984958, epsilon = 1e-6);
        let d = lp4().norm_derivative(&[r, a * r], &[a, -1.0]).unwrap();
        assert_abs_diff_eq!(d, r.powi(3) * (a - a.powi(3)), epsilon = 1e-14);
        assert_abs_diff_eq!(d, 0.358332, epsilon = 1e-6);
        // central difference away from the kink
        let h = 1e-6;
        let fd = (lp4().eval(&[r + h * a, a * r - h]) - lp4().eval(&[r - h * a, a * r + h])) / (2.0 * h);
        assert_abs_diff_eq!(d, fd, epsilon = 1e-8);

        let l1 = NormDescriptor::euclid_plus_l1(vec![0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(l1.norm_derivative(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(l1.norm_derivative(&[1.0, 0.0], &[0.0, -1.0]).unwrap(), 1.0);
        assert!(matches!(
            l1.norm_derivative(&[0.0, 0.0], &[1.0, 0.0]),
            Err(Error::ZeroArgument(_))
        ));
    }

    #[test]
    fn parallelogram_examples() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let ip = NormDescriptor::inner_product(m).unwrap();
        assert_abs_diff_eq!(ip.parallelogram_defect(&[0.3, -1.2], &[2.0, 0.7]).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            lp4().parallelogram_defect(&[1.0, 0.0], &[0.0, 1.0]).unwrap(),
            2.0 * 2f64.sqrt() - 4.0,
            epsilon = 1e-12
        );
        let asym = NormDescriptor::euclid_plus_linear(vec![0.5, 0.0]).unwrap();
        // ‖(1,1)‖ = √2+½, ‖(1,−1)‖ = √2+½, ‖(1,0)‖ = 3/2, ‖(0,1)‖ = 1
        let expected = 2.0 * (2f64.sqrt() + 0.5).powi(2) - 2.0 * 2.25 - 2.0;
        let got = asym.parallelogram_defect(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(got, expected, epsilon = 1e-12);
        assert!(got.abs() > 0.1);
    }

    #[test]
    fn grammar_round_trips() {
        for s in [
            "euclid",
            "euclid:n=3",
            "spd:[[2,0.5],[0.5,1]]",
            "lp:p=4",
            "lp:p=1.5;n=3",
            "euclid_l1:lambda=(0,1)",
            "asym:beta=(0.5,0)",
        ] {
            let space: NormDescriptor = s.parse().unwrap();
            let again: NormDescriptor = space.to_string().parse().unwrap();
            assert_eq!(space, again, "{s}");
        }
        assert_eq!("spd:1,0,0,1".parse::<NormDescriptor>().unwrap().to_string(), "euclid");
        for bad in ["lp", "lp:p=0.5", "spd:[[1,2],[3]]", "asym:beta=(0.9,0.9)", "ball", "euclid:n=0"] {
            assert!(bad.parse::<NormDescriptor>().is_err(), "{bad}");
        }
    }
}
