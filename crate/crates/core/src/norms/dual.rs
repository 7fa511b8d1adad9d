//! Dual norms and the Legendre transform.
//!
//! Every family has an exact characterization of its dual norm and of the
//! unique unit vector supporting a covector, so `𝓛(α) = ‖α‖_* · x*(α)` is
//! computed without differentiating anything. The generic sphere search is
//! kept as an independent route.

use super::{lp_norm, mat_vec, NormDescriptor, NormFamily};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, euclid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SPHERE_GRID: usize = 4096;
const SPHERE_STARTS: usize = 8;

impl NormDescriptor {
    /// `‖α‖_* = sup{α·x : ‖x‖ ≤ 1}`.
    pub fn dual_norm(&self, alpha: &[f64]) -> Result<f64> {
        check_dim(self.dim, alpha)?;
        Ok(self.dual_eval(alpha))
    }

    pub(crate) fn dual_eval(&self, alpha: &[f64]) -> f64 {
        if alpha.iter().all(|a| *a == 0.0) {
            return 0.0;
        }
        match &self.family {
            NormFamily::InnerProduct(_) => {
                let inv = self.inverse.as_ref().expect("inner-product inverse");
                dot(alpha, &mat_vec(inv, alpha)).max(0.0).sqrt()
            }
            NormFamily::Lp(p) => lp_norm(alpha, conjugate(*p)),
            NormFamily::EuclidPlusL1(l) => l1_dual_level(alpha, l),
            NormFamily::EuclidPlusLinear(b) => linear_dual(alpha, b).0,
        }
    }

    /// Legendre transform `𝓛(α) = ½∇[‖·‖_*²](α)`.
    ///
    /// Satisfies `‖𝓛(α)‖ = ‖α‖_*`, `α·𝓛(α) = ‖α‖_*²` and `𝓛(0) = 0`.
    pub fn legendre(&self, alpha: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, alpha)?;
        Ok(self.legendre_unchecked(alpha))
    }

    pub(crate) fn legendre_unchecked(&self, alpha: &[f64]) -> Vec<f64> {
        if alpha.iter().all(|a| *a == 0.0) {
            return vec![0.0; self.dim];
        }
        match &self.family {
            NormFamily::InnerProduct(_) => {
                mat_vec(self.inverse.as_ref().expect("inner-product inverse"), alpha)
            }
            NormFamily::Lp(p) => {
                let q = conjugate(*p);
                let nq = lp_norm(alpha, q);
                alpha
                    .iter()
                    .map(|a| nq * (a.abs() / nq).powf(q - 1.0) * a.signum())
                    .collect()
            }
            NormFamily::EuclidPlusL1(l) => {
                let t = l1_dual_level(alpha, l);
                let s = soft_threshold(alpha, l, t);
                let ns = self.eval(&s);
                s.into_iter().map(|c| t * c / ns).collect()
            }
            NormFamily::EuclidPlusLinear(b) => {
                let (t, u) = linear_dual(alpha, b);
                // x* = u / ‖u‖ with ‖u‖ = 1 + β·u
                let nu = 1.0 + dot(b, &u);
                u.into_iter().map(|c| t * c / nu).collect()
            }
        }
    }

    /// The unit vector `x*` with `α·x* = ‖α‖_*`, for `α ≠ 0`.
    pub fn dual_maximizer(&self, alpha: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, alpha)?;
        if alpha.iter().all(|a| *a == 0.0) {
            return Err(Error::ZeroArgument("supporting vector of the zero covector"));
        }
        let t = self.dual_eval(alpha);
        Ok(self.legendre_unchecked(alpha).into_iter().map(|c| c / t).collect())
    }

    /// `‖α‖_*` by direct maximization of `α·u / ‖u‖` over the Euclidean unit sphere.
    ///
    /// In the plane this scans a dense angular grid and refines the best cell by
    /// golden-section search. In higher dimension it runs a shrinking pattern search
    /// from several starts.
    pub fn dual_norm_by_sphere_search(&self, alpha: &[f64]) -> Result<f64> {
        check_dim(self.dim, alpha)?;
        if alpha.iter().all(|a| *a == 0.0) {
            return Ok(0.0);
        }
        let ratio = |u: &[f64]| dot(alpha, u) / self.eval(u);
        match self.dim {
            1 => Ok(ratio(&[1.0]).max(ratio(&[-1.0]))),
            2 => {
                let h = |th: f64| ratio(&[th.cos(), th.sin()]);
                let step = std::f64::consts::TAU / SPHERE_GRID as f64;
                let (best_k, _) = (0..SPHERE_GRID)
                    .map(|k| (k, h(k as f64 * step)))
                    .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
                let centre = best_k as f64 * step;
                let (th, v) = golden_max(h, centre - step, centre + step);
                Ok(v.max(h(th)))
            }
            n => {
                let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
                let mut starts: Vec<Vec<f64>> = vec![alpha.to_vec()];
                for i in 0..n.min(SPHERE_STARTS / 2) {
                    let mut e = vec![0.0; n];
                    e[i] = 1.0;
                    starts.push(e.clone());
                    e[i] = -1.0;
                    starts.push(e);
                }
                while starts.len() < SPHERE_STARTS {
                    starts.push((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
                }
                let mut best = f64::NEG_INFINITY;
                let mut converged = false;
                for s in starts {
                    let (v, ok) = pattern_search(&ratio, s);
                    if v > best {
                        best = v;
                        converged = ok;
                    }
                }
                if converged {
                    Ok(best)
                } else {
                    Err(Error::NonConvergence { achieved: best })
                }
            }
        }
    }
}

pub(crate) fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

/// Coordinatewise soft-thresholding of `α` at levels `t·λᵢ`.
fn soft_threshold(alpha: &[f64], lambda: &[f64], t: f64) -> Vec<f64> {
    alpha
        .iter()
        .zip(lambda)
        .map(|(a, l)| a.signum() * (a.abs() - t * l).max(0.0))
        .collect()
}

/// Dual of `|x|₂ + Σλᵢ|xᵢ|`: the unique `t > 0` with `|S_{tλ}(α)|₂ = t`.
///
/// The dual of a sum of norms is an infimal convolution of the duals, which
/// reduces to this scalar equation. On each interval between consecutive
/// thresholds `|αᵢ|/λᵢ` the equation is quadratic in `t` and is solved in
/// closed form.
fn l1_dual_level(alpha: &[f64], lambda: &[f64]) -> f64 {
    let mut thresholds: Vec<(f64, usize)> = alpha
        .iter()
        .zip(lambda)
        .enumerate()
        .filter(|(_, (_, l))| **l > 0.0)
        .map(|(i, (a, l))| (a.abs() / l, i))
        .collect();
    thresholds.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut live = vec![true; alpha.len()];
    let mut lo = 0.0;
    let mut next = 0;
    loop {
        // skip thresholds already passed
        while next < thresholds.len() && thresholds[next].0 <= lo {
            live[thresholds[next].1] = false;
            next += 1;
        }
        let hi = thresholds.get(next).map_or(f64::INFINITY, |t| t.0);
        let (mut qa, mut qb, mut qc) = (-1.0, 0.0, 0.0);
        for i in 0..alpha.len() {
            if live[i] {
                let a = alpha[i].abs();
                qa += lambda[i] * lambda[i];
                qb -= 2.0 * a * lambda[i];
                qc += a * a;
            }
        }
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let root = 2.0 * qc / (-qb + disc.sqrt());
            if root.is_finite() && root >= lo && root <= hi * (1.0 + 1e-14) {
                return root;
            }
        }
        if next >= thresholds.len() {
            // rounding pushed the root onto the last boundary
            return lo;
        }
        lo = hi;
    }
}

/// Dual of `|x|₂ + β·x`: returns `(t, u)` with `α = t(u + β)`, `|u|₂ = 1`.
fn linear_dual(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let ab = dot(alpha, beta);
    let bb = dot(beta, beta);
    let aa = dot(alpha, alpha);
    let disc = (ab * ab + (1.0 - bb) * aa).max(0.0).sqrt();
    // positive root of (1−|β|²)t² + 2(α·β)t − |α|² = 0, in cancellation-free form
    let t = if ab <= 0.0 {
        (disc - ab) / (1.0 - bb)
    } else {
        aa / (disc + ab)
    };
    let u: Vec<f64> = alpha
        .iter()
        .zip(beta)
        .map(|(a, b)| (a - t * b) / t)
        .collect();
    let nu = euclid(&u);
    (t, u.into_iter().map(|c| c / nu).collect())
}

fn golden_max(h: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (h(c), h(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-15 {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = h(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = h(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn pattern_search(h: &impl Fn(&[f64]) -> f64, start: Vec<f64>) -> (f64, bool) {
    let n = start.len();
    let normalize = |v: Vec<f64>| {
        let e = euclid(&v);
        v.into_iter().map(|c| c / e).collect::<Vec<_>>()
    };
    let mut u = normalize(start);
    let mut best = h(&u);
    let mut step = 0.5;
    for _ in 0..100_000 {
        if step < 1e-13 {
            return (best, true);
        }
        let mut improved = false;
        for i in 0..n {
            for sgn in [1.0, -1.0] {
                let mut cand = u.clone();
                cand[i] += sgn * step;
                let cand = normalize(cand);
                let v = h(&cand);
                if v > best {
                    best = v;
                    u = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, false)
}
