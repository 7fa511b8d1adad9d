mod common;

use common::*;
use nalgebra::DMatrix;
use normflow::contraction::{
    check_contraction, check_k_contraction, commutativity_defect, default_grid, distance_profile,
    estimate_best_constant, first_variation_check, monotonicity_gap, Commutativity, DEFAULT_TOL, SMOOTH_TOL,
};
use normflow::flow::{integrate, integrate_max_affine};
use normflow::{AffinePiece, ConvexFunction, Family, NormDescriptor, ParameterGrid};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let l = DMatrix::from_fn(n, n, |i, j| if j <= i { rng.random_range(-1.0..1.0) } else { 0.0 });
    &l * l.transpose() + DMatrix::identity(n, n) * 0.2
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-3.0..3.0)).collect()
}

#[test]
fn euclidean_flows_never_expand() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..100 {
        let n = rng.random_range(1..=4);
        let space = NormDescriptor::inner_product(random_spd(&mut rng, n)).unwrap();
        let pieces: Vec<AffinePiece> = (0..rng.random_range(1..=5))
            .map(|_| AffinePiece::new(random_point(&mut rng, n), rng.random_range(-1.0..1.0)))
            .collect();
        let f = ConvexFunction::max_affine(pieces).unwrap();
        let (x, y) = (random_point(&mut rng, n), random_point(&mut rng, n));
        let xi = integrate_max_affine(&space, &f, &x, 5.0).unwrap();
        let zeta = integrate_max_affine(&space, &f, &y, 5.0).unwrap();
        let profile = distance_profile(&space, &xi, &zeta, &default_grid(&xi, &zeta)).unwrap();
        let report = check_contraction(&profile, DEFAULT_TOL).unwrap();
        assert!(!report.violated(), "case {case}: {f} from {x:?}, {y:?}: {report:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn monotonicity_gap_is_nonpositive(f in prop_oneof![max_affine(3, 5), quadratic(3)], x in vector(3), y in vector(3)) {
        if let Ok(gap) = monotonicity_gap(&f, &x, &y) {
            prop_assert!(gap <= 1e-12, "gap {gap}");
        }
    }

    #[test]
    fn inner_product_metrics_commute(m in spd(3), f in quadratic(3), x in vector(3), y in vector(3)) {
        let space = NormDescriptor::inner_product(m).unwrap();
        match commutativity_defect(&space, &f, &x, &y) {
            Ok(Commutativity::Defect(d)) => prop_assert!(d <= 1e-8, "defect {d}"),
            Ok(Commutativity::Degenerate(why)) => prop_assert!(false, "degenerate: {why}"),
            Err(_) => {}
        }
    }

    #[test]
    fn first_variation_agrees(s in planar_space(), f in max_affine(2, 3), x in vector(2), y in vector(2), frac in 0.05..0.95f64) {
        prop_assume!(s.is_smooth());
        let xi = integrate_max_affine(&s, &f, &x, 1.0).unwrap();
        let zeta = integrate_max_affine(&s, &f, &y, 1.0).unwrap();
        let t = frac * xi.end_time().min(zeta.end_time());
        if let Ok(fv) = first_variation_check(&s, &f, &xi, &zeta, t) {
            let scale = fv.analytic.abs().max(1.0);
            prop_assert!((fv.analytic - fv.numeric).abs() <= 1e-5 * scale, "{fv:?} at t = {t}");
        }
    }

    #[test]
    fn euclidean_quadratics_k_contract(f in quadratic(2), x in vector(2), y in vector(2)) {
        let e = NormDescriptor::euclidean(2).unwrap();
        let k = f.k_modulus();
        let xi = integrate(&e, &f, &x, 2.0, SMOOTH_TOL).unwrap();
        let zeta = integrate(&e, &f, &y, 2.0, SMOOTH_TOL).unwrap();
        let profile = distance_profile(&e, &xi, &zeta, &default_grid(&xi, &zeta)).unwrap();
        let report = check_k_contraction(&profile, k, DEFAULT_TOL).unwrap();
        prop_assert!(!report.violated(), "K = {k}: {report:?}");
    }
}

#[test]
fn best_constant_ignores_function_scale() {
    let cases = [
        ("euclid_l1:lambda=(0,1)", Family::Step1, "eps=0.25,0.5;c=0.5,0.9"),
        ("lp:p=4", Family::Step4, "a=0.25,0.5,1"),
        ("asym:beta=(0.5,0)", Family::Step2, "c=0.25,0.5"),
    ];
    for (name, family, grid) in cases {
        let s = space(name);
        let g: ParameterGrid = grid.parse().unwrap();
        let base = estimate_best_constant(&s, family, &g).unwrap().c_hat;
        for c in [0.5, 2.0] {
            let scaled = estimate_best_constant(&s, family, &g.clone().with("scale", vec![c])).unwrap().c_hat;
            assert!((scaled - base).abs() <= 1e-9, "{name} {family} c = {c}: {scaled} vs {base}");
        }
    }
}
