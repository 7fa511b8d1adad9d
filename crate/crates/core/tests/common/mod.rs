#![allow(dead_code)]

use nalgebra::DMatrix;
use normflow::{AffinePiece, ConvexFunction, NormDescriptor};
use proptest::prelude::*;

pub const PLANAR_SPACES: [&str; 8] = [
    "euclid",
    "spd:[[2,0.3],[0.3,0.5]]",
    "lp:p=4",
    "lp:p=1.5",
    "euclid_l1:lambda=(0,1)",
    "euclid_l1:lambda=(0.4,2)",
    "asym:beta=(0.5,0)",
    "asym:beta=(-0.3,0.6)",
];

pub fn space(s: &str) -> NormDescriptor {
    s.parse().unwrap()
}

pub fn planar_space() -> impl Strategy<Value = NormDescriptor> {
    (0..PLANAR_SPACES.len()).prop_map(|i| space(PLANAR_SPACES[i]))
}

pub fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, n)
}

pub fn nonzero(n: usize) -> impl Strategy<Value = Vec<f64>> {
    vector(n).prop_filter("nonzero", |v| v.iter().map(|c| c * c).sum::<f64>() > 1e-4)
}

/// SPD matrix `LLᵀ + 0.2 I` from a random lower-triangular factor.
pub fn spd(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0..1.0f64, n * n).prop_map(move |v| {
        let l = DMatrix::from_fn(n, n, |i, j| if j <= i { v[i * n + j] } else { 0.0 });
        &l * l.transpose() + DMatrix::identity(n, n) * 0.2
    })
}

pub fn max_affine(n: usize, max_pieces: usize) -> impl Strategy<Value = ConvexFunction> {
    prop::collection::vec((vector(n), -1.0..1.0f64), 1..=max_pieces).prop_map(|ps| {
        ConvexFunction::max_affine(ps.into_iter().map(|(g, b)| AffinePiece::new(g, b)).collect()).unwrap()
    })
}

pub fn quadratic(n: usize) -> impl Strategy<Value = ConvexFunction> {
    (spd(n), vector(n)).prop_map(move |(a, b)| ConvexFunction::quadratic(a, b, 0.0).unwrap())
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
