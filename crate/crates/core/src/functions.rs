//! Convex test functions: maxima of affine pieces, convex quadratics, and
//! positive multiples of either.
//!
//! Mini-grammar: `maxaff:[(g11,g12|b1),(g21,g22|b2),...]`,
//! `quad:A=<matrix>;b=<tuple>;c=<scalar>` and `scale:c=<scalar>;f=<inner>`.

use crate::error::{check_dim, Error, Result};
use crate::grammar::{fmt_matrix, fmt_tuple, parse_f64, parse_matrix, parse_options, parse_tuple, split_top};
use crate::linalg::{dot, max_abs, neg};
use crate::norms::{mat_vec, NormDescriptor};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

/// Largest active set solved by exhaustive face enumeration.
const MAX_ENUMERATED: usize = 12;
const HULL_RESTARTS: usize = 16;

/// One affine piece `x ↦ g·x + b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffinePiece {
    pub gradient: Vec<f64>,
    pub offset: f64,
}

impl AffinePiece {
    pub fn new(gradient: Vec<f64>, offset: f64) -> Self {
        Self { gradient, offset }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.gradient, x) + self.offset
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxAffine {
    pieces: Vec<AffinePiece>,
}

impl MaxAffine {
    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].gradient.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.eval(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `½xᵀAx + b·x + c` with `A` symmetric positive-semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    a: DMatrix<f64>,
    b: Vec<f64>,
    c: f64,
}

impl Quadratic {
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn b(&self) -> &[f64] {
        &self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    fn value(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, &mat_vec(&self.a, x)) + dot(&self.b, x) + self.c
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        mat_vec(&self.a, x).iter().zip(&self.b).map(|(u, v)| u + v).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scaled {
    factor: f64,
    inner: Box<ConvexFunction>,
}

impl Scaled {
    pub fn factor(&self) -> f64 {
        self.factor
    }
    pub fn inner(&self) -> &ConvexFunction {
        &self.inner
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConvexFunction {
    MaxAffine(MaxAffine),
    Quadratic(Quadratic),
    Scaled(Scaled),
}

/// Active pieces of a max-of-affine function at a point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubdifferentialFace {
    pub active: Vec<usize>,
    /// Gradients of the active pieces; their convex hull is `∂f(x)`.
    pub vertices: Vec<Vec<f64>>,
    pub tol: f64,
}

/// Default activity tolerance `1e−9·max(1, |f(x)|)`.
pub fn default_activity_tol(value: f64) -> f64 {
    1e-9 * value.abs().max(1.0)
}

impl ConvexFunction {
    pub fn max_affine(pieces: Vec<AffinePiece>) -> Result<Self> {
        let first = pieces.first().ok_or(Error::Empty("max_affine needs at least one piece"))?;
        let n = first.gradient.len();
        if n == 0 {
            return Err(Error::param("pieces", "gradients must be nonempty"));
        }
        for (k, p) in pieces.iter().enumerate() {
            check_dim(n, &p.gradient)?;
            if !p.offset.is_finite() || p.gradient.iter().any(|g| !g.is_finite()) {
                return Err(Error::param("pieces", format!("piece {k} is not finite")));
            }
            if pieces[..k].contains(p) {
                return Err(Error::param("pieces", format!("piece {k} duplicates an earlier piece")));
            }
        }
        Ok(Self::MaxAffine(MaxAffine { pieces }))
    }

    pub fn quadratic(a: DMatrix<f64>, b: Vec<f64>, c: f64) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n {
            return Err(Error::param("A", "matrix must be square and nonempty"));
        }
        check_dim(n, &b)?;
        let scale = a.amax().max(1.0);
        if (&a - a.transpose()).amax() > 1e-12 * scale {
            return Err(Error::param("A", "matrix must be symmetric"));
        }
        let a = (&a + a.transpose()) * 0.5;
        if a.clone().symmetric_eigen().eigenvalues.min() < -1e-12 * scale {
            return Err(Error::param("A", "matrix must be positive-semidefinite"));
        }
        if !c.is_finite() || b.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("b", "coefficients must be finite"));
        }
        Ok(Self::Quadratic(Quadratic { a, b, c }))
    }

    /// Wraps `f` as `c·f` without distributing the factor.
    pub fn scaled(factor: f64, inner: ConvexFunction) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::param("c", "scaling factor must be positive"));
        }
        Ok(Self::Scaled(Scaled { factor, inner: Box::new(inner) }))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::MaxAffine(m) => m.dim(),
            Self::Quadratic(q) => q.b.len(),
            Self::Scaled(s) => s.inner.dim(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x)?;
        Ok(self.value(x))
    }

    pub(crate) fn value(&self, x: &[f64]) -> f64 {
        match self {
            Self::MaxAffine(m) => m.value(x),
            Self::Quadratic(q) => q.value(x),
            Self::Scaled(s) => s.factor * s.inner.value(x),
        }
    }

    /// The pieces of `f` with all scaling factors multiplied in, if `f` is piecewise affine.
    pub fn flat_pieces(&self) -> Option<Vec<AffinePiece>> {
        match self {
            Self::MaxAffine(m) => Some(m.pieces.clone()),
            Self::Quadratic(_) => None,
            Self::Scaled(s) => s.inner.flat_pieces().map(|ps| {
                ps.into_iter()
                    .map(|p| AffinePiece::new(p.gradient.iter().map(|g| s.factor * g).collect(), s.factor * p.offset))
                    .collect()
            }),
        }
    }

    pub fn is_piecewise_affine(&self) -> bool {
        match self {
            Self::MaxAffine(_) => true,
            Self::Quadratic(_) => false,
            Self::Scaled(s) => s.inner.is_piecewise_affine(),
        }
    }

    /// Pieces `k` with `piece_k(x) ≥ f(x) − tol`; `tol` defaults to [`default_activity_tol`].
    pub fn active_set(&self, x: &[f64], tol: Option<f64>) -> Result<SubdifferentialFace> {
        check_dim(self.dim(), x)?;
        let pieces = self
            .flat_pieces()
            .ok_or(Error::WrongFamily { expected: "a max-of-affine function" })?;
        Ok(face_of(&pieces, x, tol))
    }

    /// `df(x)`; fails with `AmbiguousDifferential` at a kink.
    pub fn differential(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x)?;
        match self {
            Self::Quadratic(q) => Ok(q.gradient(x)),
            _ => match self.flat_pieces() {
                Some(pieces) => {
                    let face = face_of(&pieces, x, None);
                    if face.active.len() == 1 {
                        Ok(face.vertices.into_iter().next().unwrap())
                    } else {
                        Err(Error::AmbiguousDifferential { active: face.active })
                    }
                }
                None => {
                    let Self::Scaled(s) = self else { unreachable!() };
                    Ok(s.inner.differential(x)?.into_iter().map(|g| s.factor * g).collect())
                }
            },
        }
    }

    /// The subgradient `α* ∈ ∂f(x)` minimizing `‖−α‖_*`.
    pub fn min_dual_subgradient(&self, x: &[f64], space: &NormDescriptor) -> Result<Vec<f64>> {
        check_dim(self.dim(), x)?;
        check_dim(space.dim(), x)?;
        match self {
            Self::Quadratic(q) => Ok(q.gradient(x)),
            Self::Scaled(s) if !s.inner.is_piecewise_affine() => Ok(s
                .inner
                .min_dual_subgradient(x, space)?
                .into_iter()
                .map(|g| s.factor * g)
                .collect()),
            _ => {
                let pieces = self.flat_pieces().expect("piecewise affine");
                let face = face_of(&pieces, x, None);
                Ok(min_dual_in_hull(space, &face.vertices))
            }
        }
    }

    /// `c·f`, distributing the factor into the representation.
    pub fn scale(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::param("c", "scaling factor must be positive"));
        }
        Ok(match self {
            Self::MaxAffine(m) => Self::MaxAffine(MaxAffine {
                pieces: m
                    .pieces
                    .iter()
                    .map(|p| AffinePiece::new(p.gradient.iter().map(|g| c * g).collect(), c * p.offset))
                    .collect(),
            }),
            Self::Quadratic(q) => Self::Quadratic(Quadratic {
                a: &q.a * c,
                b: q.b.iter().map(|v| c * v).collect(),
                c: c * q.c,
            }),
            Self::Scaled(s) => Self::Scaled(Scaled { factor: s.factor * c, inner: s.inner.clone() }),
        })
    }

    /// Largest `K` for which the representation guarantees Euclidean `K`-convexity.
    pub fn k_modulus(&self) -> f64 {
        match self {
            Self::MaxAffine(_) => 0.0,
            Self::Quadratic(q) => q.a.clone().symmetric_eigen().eigenvalues.min().max(0.0),
            Self::Scaled(s) => s.factor * s.inner.k_modulus(),
        }
    }
}

pub(crate) fn face_of(pieces: &[AffinePiece], x: &[f64], tol: Option<f64>) -> SubdifferentialFace {
    let values: Vec<f64> = pieces.iter().map(|p| p.eval(x)).collect();
    let f = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = tol.unwrap_or_else(|| default_activity_tol(f));
    let active: Vec<usize> = (0..pieces.len()).filter(|&k| values[k] >= f - tol).collect();
    let vertices = active.iter().map(|&k| pieces[k].gradient.clone()).collect();
    SubdifferentialFace { active, vertices, tol }
}

/// `argmin{‖−α‖_* : α ∈ conv(vertices)}`.
pub(crate) fn min_dual_in_hull(space: &NormDescriptor, vertices: &[Vec<f64>]) -> Vec<f64> {
    let n = space.dim();
    match vertices.len() {
        0 => vec![0.0; n],
        1 => vertices[0].clone(),
        k => {
            if let Some(p) = space.gram_inverse() {
                if k <= MAX_ENUMERATED {
                    if let Some(w) = enumerate_min_point(vertices, &p) {
                        return combine(vertices, &w);
                    }
                }
            }
            // exact zero test in the Euclidean metric
            if k <= MAX_ENUMERATED {
                if let Some(w) = enumerate_min_point(vertices, &DMatrix::identity(n, n)) {
                    let z = combine(vertices, &w);
                    let scale = vertices.iter().map(|v| max_abs(v)).fold(0.0, f64::max);
                    if max_abs(&z) <= 1e-13 * scale.max(1.0) {
                        return vec![0.0; n];
                    }
                }
            }
            if k == 2 {
                return segment_min(space, &vertices[0], &vertices[1]);
            }
            // edge minimizers are exact; prefer them unless the descent does strictly better
            let value = |a: &[f64]| space.dual_eval(&neg(a));
            let interior = simplex_descent(space, vertices);
            let mut best = (value(&interior) * (1.0 + 1e-12), interior);
            for i in 0..k {
                for j in i + 1..k {
                    let cand = segment_min(space, &vertices[i], &vertices[j]);
                    let v = value(&cand);
                    if v <= best.0 {
                        best = (v, cand);
                    }
                }
            }
            best.1
        }
    }
}

fn combine(vertices: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    let n = vertices[0].len();
    let mut out = vec![0.0; n];
    for (v, wk) in vertices.iter().zip(w) {
        for i in 0..n {
            out[i] += wk * v[i];
        }
    }
    out
}

/// Minimum of `αᵀPα` over the hull, by solving the equality-constrained problem
/// on every vertex subset and keeping the best feasible one.
fn enumerate_min_point(vertices: &[Vec<f64>], p: &DMatrix<f64>) -> Option<Vec<f64>> {
    let k = vertices.len();
    let g = DMatrix::from_fn(k, vertices[0].len(), |i, j| vertices[i][j]);
    let q = &g * p * g.transpose();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1u32 << k) {
        let idx: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let m = idx.len();
        let mut kkt = DMatrix::zeros(m + 1, m + 1);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                kkt[(a, b)] = 2.0 * q[(i, j)];
            }
            kkt[(a, m)] = 1.0;
            kkt[(m, a)] = 1.0;
        }
        let mut rhs = DVector::zeros(m + 1);
        rhs[m] = 1.0;
        let Some(sol) = kkt.clone().lu().solve(&rhs) else { continue };
        if sol.iter().any(|v| !v.is_finite()) || (&kkt * &sol - &rhs).amax() > 1e-9 {
            continue;
        }
        if (0..m).any(|a| sol[a] < -1e-12) {
            continue;
        }
        let mut w = vec![0.0; k];
        let mut total = 0.0;
        for (a, &i) in idx.iter().enumerate() {
            w[i] = sol[a].max(0.0);
            total += w[i];
        }
        w.iter_mut().for_each(|x| *x /= total);
        let wv = DVector::from_vec(w.clone());
        let val = (wv.transpose() * &q * &wv)[(0, 0)];
        if best.as_ref().map_or(true, |(b, _)| val < *b - 1e-15 * b.abs().max(1e-300)) {
            best = Some((val, w));
        }
    }
    best.map(|(_, w)| w)
}

/// Minimizes `‖−α(s)‖_*` on `α(s) = g₀ + s(g₁ − g₀)` by bisection on the
/// monotone derivative `s ↦ −(g₁ − g₀)·𝓛(−α(s))` of `½‖−α(s)‖_*²`.
fn segment_min(space: &NormDescriptor, g0: &[f64], g1: &[f64]) -> Vec<f64> {
    let d: Vec<f64> = g1.iter().zip(g0).map(|(a, b)| a - b).collect();
    let point = |s: f64| -> Vec<f64> { g0.iter().zip(&d).map(|(a, b)| a + s * b).collect() };
    let slope = |s: f64| -> f64 { -dot(&d, &space.legendre_unchecked(&neg(&point(s)))) };
    if slope(0.0) >= 0.0 {
        return g0.to_vec();
    }
    if slope(1.0) <= 0.0 {
        return g1.to_vec();
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (a, b) = (point(lo), point(hi));
    if space.dual_eval(&neg(&a)) <= space.dual_eval(&neg(&b)) {
        a
    } else {
        b
    }
}

fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (i, ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - 1.0) / (i as f64 + 1.0);
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Projected gradient descent on barycentric weights with backtracking.
fn simplex_descent(space: &NormDescriptor, vertices: &[Vec<f64>]) -> Vec<f64> {
    let k = vertices.len();
    let objective = |w: &[f64]| 0.5 * space.dual_eval(&neg(&combine(vertices, w))).powi(2);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut starts: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut w = vec![0.0; k];
            w[i] = 1.0;
            w
        })
        .collect();
    starts.push(vec![1.0 / k as f64; k]);
    while starts.len() < HULL_RESTARTS.max(k + 1) {
        let raw: Vec<f64> = (0..k).map(|_| -rng.random::<f64>().ln()).collect();
        let s: f64 = raw.iter().sum();
        starts.push(raw.into_iter().map(|x| x / s).collect());
    }
    starts.truncate(HULL_RESTARTS.max(k + 1));

    let mut best_w = starts[0].clone();
    let mut best = objective(&best_w);
    for mut w in starts {
        let mut val = objective(&w);
        let mut step = 1.0;
        for _ in 0..2000 {
            let alpha = combine(vertices, &w);
            let l = space.legendre_unchecked(&neg(&alpha));
            let grad: Vec<f64> = vertices.iter().map(|v| -dot(v, &l)).collect();
            let mut accepted = false;
            while step > 1e-18 {
                let cand = project_simplex(&w.iter().zip(&grad).map(|(a, g)| a - step * g).collect::<Vec<_>>());
                let cv = objective(&cand);
                if cv < val {
                    let moved = cand.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    w = cand;
                    val = cv;
                    accepted = moved > 1e-15;
                    step *= 2.0;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if val < best {
            best = val;
            best_w = w;
        }
    }
    combine(vertices, &best_w)
}

impl fmt::Display for ConvexFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MaxAffine(m) => {
                let items: Vec<String> = m
                    .pieces
                    .iter()
                    .map(|p| {
                        let g: Vec<String> = p.gradient.iter().map(|x| format!("{x}")).collect();
                        format!("({}|{})", g.join(","), p.offset)
                    })
                    .collect();
                write!(f, "maxaff:[{}]", items.join(","))
            }
            Self::Quadratic(q) => write!(f, "quad:A={};b={};c={}", fmt_matrix(&q.a), fmt_tuple(&q.b), q.c),
            Self::Scaled(s) => write!(f, "scale:c={};f={}", s.factor, s.inner),
        }
    }
}

impl FromStr for ConvexFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (head, rest) = t
            .split_once(':')
            .ok_or_else(|| Error::parse(s, "expected <family>:<parameters>"))?;
        let wrap = |e: Error| match e {
            Error::InvalidParameter { name, reason } => Error::parse(s, format!("{name}: {reason}")),
            Error::DimensionMismatch { expected, found } => {
                Error::parse(s, format!("dimension mismatch: expected {expected}, found {found}"))
            }
            other => other,
        };
        match head.trim() {
            "maxaff" => {
                let body = rest.trim();
                let body = body
                    .strip_prefix('[')
                    .and_then(|b| b.strip_suffix(']'))
                    .ok_or_else(|| Error::parse(s, "pieces must be enclosed in [...]"))?;
                let pieces = split_top(body, ',')
                    .into_iter()
                    .map(|piece| {
                        let p = piece.trim();
                        let p = p
                            .strip_prefix('(')
                            .and_then(|b| b.strip_suffix(')'))
                            .ok_or_else(|| Error::parse(piece, "piece must look like (g1,...,gn|b)"))?;
                        let (g, b) = p
                            .split_once('|')
                            .ok_or_else(|| Error::parse(piece, "missing `|offset`"))?;
                        Ok(AffinePiece::new(parse_tuple(g)?, parse_f64(b)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::max_affine(pieces).map_err(wrap)
            }
            "quad" => {
                let mut a = None;
                let mut b = None;
                let mut c = 0.0;
                for (k, v) in parse_options(rest)? {
                    match k {
                        "A" => a = Some(parse_matrix(v)?),
                        "b" => b = Some(parse_tuple(v)?),
                        "c" => c = parse_f64(v)?,
                        _ => return Err(Error::parse(s, format!("unknown option `{k}`"))),
                    }
                }
                let a = a.ok_or_else(|| Error::parse(s, "missing A"))?;
                let b = b.unwrap_or_else(|| vec![0.0; a.nrows()]);
                Self::quadratic(a, b, c).map_err(wrap)
            }
            "scale" => {
                let rest = rest.trim();
                let body = rest
                    .strip_prefix("c=")
                    .ok_or_else(|| Error::parse(s, "expected c=<scalar>;f=<inner>"))?;
                let (c, inner) = body
                    .split_once(";f=")
                    .ok_or_else(|| Error::parse(s, "expected c=<scalar>;f=<inner>"))?;
                Self::scaled(parse_f64(c)?, inner.parse()?).map_err(wrap)
            }
            other => Err(Error::parse(s, format!("unknown function family `{other}`"))),
        }
    }
}

impl Serialize for ConvexFunction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for ConvexFunction {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
