mod common;

use common::*;
use normflow::contraction::scaling_reparam_residual;
use normflow::flow::{edi_residual, integrate, integrate_max_affine, integrate_smooth};
use normflow::{ConvexFunction, NormDescriptor, Trajectory};
use proptest::prelude::*;

const CERT_TOL: f64 = 1e-6;

fn benchmark() -> (NormDescriptor, ConvexFunction, [f64; 2]) {
    let f: ConvexFunction = "quad:A=[[1,0],[0,2]];b=(0,0);c=0".parse().unwrap();
    (NormDescriptor::euclidean(2).unwrap(), f, [0.5, -0.5])
}

fn endpoint_error(tol: f64) -> f64 {
    let (e, f, x0) = benchmark();
    let t = 3.0;
    let tr = integrate_smooth(&e, &f, &x0, t, tol).unwrap();
    let p = tr.point_at(t).unwrap();
    let exact = [0.5 * (-t).exp(), -0.5 * (-2.0 * t).exp()];
    max_abs(&sub(&p, &exact))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn edi_is_one_sided(s in planar_space(), f in prop_oneof![max_affine(2, 4), quadratic(2)],
                        pts in prop::collection::vec(vector(2), 2..6)) {
        let times: Vec<f64> = (0..pts.len()).map(|k| k as f64 * 0.5).collect();
        let end = *times.last().unwrap();
        let curve = Trajectory::polyline(times, pts).unwrap();
        let r = edi_residual(&s, &f, &curve, 0.0, end).unwrap();
        prop_assert!(r.residual >= -1e-8, "{r:?}");
    }

    #[test]
    fn max_affine_trajectories_are_certified(s in planar_space(), f in max_affine(2, 4), x0 in vector(2),
                                             a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let tr = integrate_max_affine(&s, &f, &x0, 2.0).unwrap();
        let end = tr.end_time();
        let whole = edi_residual(&s, &f, &tr, 0.0, end).unwrap();
        prop_assert!(whole.residual.abs() <= CERT_TOL, "{whole:?}");
        let (lo, hi) = (a.min(b) * end, a.max(b) * end);
        prop_assume!(hi - lo > 1e-6);
        let part = edi_residual(&s, &f, &tr, lo, hi).unwrap();
        prop_assert!(part.residual.abs() <= CERT_TOL, "{part:?}");
    }

    #[test]
    fn smooth_trajectories_are_certified(s in planar_space(), f in quadratic(2), x0 in vector(2)) {
        prop_assume!(s.is_smooth());
        let tr = integrate_smooth(&s, &f, &x0, 1.0, 1e-10).unwrap();
        let r = edi_residual(&s, &f, &tr, 0.0, tr.end_time()).unwrap();
        prop_assert!(r.residual.abs() <= CERT_TOL, "{r:?}");
    }

    #[test]
    fn breakpoints_solve_event_equations(s in planar_space(), f in max_affine(2, 5), x0 in vector(2)) {
        let tr = integrate_max_affine(&s, &f, &x0, 3.0).unwrap();
        let pieces = f.flat_pieces().unwrap();
        let bps = tr.breakpoints();
        for b in &bps[1..bps.len() - 1] {
            let vals: Vec<f64> = pieces.iter().map(|p| p.eval(&b.point)).collect();
            let fx = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let ties = vals.iter().filter(|v| (fx - **v).abs() <= 1e-12 * fx.abs().max(1.0)).count();
            prop_assert!(ties >= 2, "t = {}: {vals:?}", b.time);
        }
    }

    #[test]
    fn scaling_reparametrizes(s in planar_space(), f in prop_oneof![max_affine(2, 3), quadratic(2)],
                              x0 in vector(2), up in any::<bool>()) {
        prop_assume!(f.is_piecewise_affine() || s.is_smooth());
        let c = if up { 2.0 } else { 0.5 };
        let r = scaling_reparam_residual(&s, &f, &x0, c, 1.0).unwrap();
        prop_assert!(r <= 1e-8, "residual {r}");
    }
}

#[test]
fn dispatch_picks_the_exact_integrator() {
    let e = NormDescriptor::euclidean(2).unwrap();
    let f: ConvexFunction = "maxaff:[(1,0|0),(-1,0|0)]".parse().unwrap();
    assert!(integrate(&e, &f, &[2.0, 0.0], 3.0, 1e-9).unwrap().is_piecewise_linear());
}

#[test]
fn halving_tol_quarters_endpoint_error() {
    let tols = [1e-6, 5e-7, 2.5e-7, 1.25e-7];
    let errs: Vec<f64> = tols.iter().map(|t| endpoint_error(*t)).collect();
    for w in errs.windows(2) {
        let gain = w[0] / w[1];
        assert!(gain >= 4.0, "errors {errs:?}: gain {gain}");
    }
}

#[test]
fn halving_tol_reduces_endpoint_error() {
    let tols = [1e-6, 5e-7, 2.5e-7, 1.25e-7];
    let errs: Vec<f64> = tols.iter().map(|t| endpoint_error(*t)).collect();
    for w in errs.windows(2) {
        assert!(w[0] / w[1] >= 2.0, "errors {errs:?}");
    }
}
