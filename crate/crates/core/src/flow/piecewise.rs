use super::{check_horizon, Breakpoint, Status, Trajectory, STATIONARY_TOL};
use crate::error::{check_dim, Error, Result};
use crate::functions::{face_of, min_dual_in_hull, ConvexFunction};
use crate::linalg::{dot, neg};
use crate::norms::NormDescriptor;

/// Cycling guard on the number of active-set changes.
pub const MAX_EVENTS: usize = 1_000_000;

/// Exact piecewise-linear gradient curve of a max-of-affine `f` from `x0` on `[0, horizon]`.
///
/// On each segment the velocity is `𝓛(−α*)` for the minimal-dual-norm subgradient of
/// the current face. Pieces of the face realizing the largest rate `g_k·v` stay active
/// (the curve slides along them), the others drop out, and the segment ends at the first
/// time an inactive piece catches up with the maximum.
pub fn integrate_max_affine(
    space: &NormDescriptor,
    f: &ConvexFunction,
    x0: &[f64],
    horizon: f64,
) -> Result<Trajectory> {
    check_dim(space.dim(), x0)?;
    check_dim(f.dim(), x0)?;
    check_horizon(horizon)?;
    let pieces = f
        .flat_pieces()
        .ok_or(Error::WrongFamily { expected: "a max-of-affine function" })?;
    let n = x0.len();

    let mut breakpoints = Vec::new();
    let mut t = 0.0f64;
    let mut x = x0.to_vec();
    let mut status = Status::HorizonReached;
    let mut events = 0usize;

    while t < horizon {
        let face = face_of(&pieces, &x, None);
        let alpha = min_dual_in_hull(space, &face.vertices);
        if space.dual_eval(&neg(&alpha)) <= STATIONARY_TOL {
            breakpoints.push(Breakpoint { time: t, point: x.clone(), velocity: vec![0.0; n] });
            status = Status::Stationary;
            t = horizon;
            break;
        }
        let v = space.legendre_unchecked(&neg(&alpha));
        let rates: Vec<f64> = pieces.iter().map(|p| dot(&p.gradient, &v)).collect();
        let rate_tol = 1e-12 * rates.iter().fold(1.0f64, |m, r| m.max(r.abs()));
        let top = face.active.iter().map(|&k| rates[k]).fold(f64::NEG_INFINITY, f64::max);

        let values: Vec<f64> = pieces.iter().map(|p| p.eval(&x)).collect();
        let fx = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut tau = horizon - t;
        for j in (0..pieces.len()).filter(|j| !face.active.contains(j)) {
            let gain = rates[j] - top;
            if gain > rate_tol {
                let when = (fx - values[j]) / gain;
                if when < tau {
                    tau = when;
                }
            }
        }
        // grazing contact: nudge into the region the velocity points into
        tau = tau.max(1e-12 * t.abs().max(1.0)).min(horizon - t);

        breakpoints.push(Breakpoint { time: t, point: x.clone(), velocity: v.clone() });
        let next_t = if tau >= horizon - t { horizon } else { t + tau };
        x = x.iter().zip(&v).map(|(xi, vi)| xi + (next_t - t) * vi).collect();
        t = next_t;
        events += 1;
        if events > MAX_EVENTS {
            return Err(Error::TooManyEvents(MAX_EVENTS));
        }
    }

    let last_velocity = breakpoints.last().map_or(vec![0.0; n], |b: &Breakpoint| b.velocity.clone());
    breakpoints.push(Breakpoint { time: t.max(horizon), point: x, velocity: last_velocity });
    Ok(Trajectory::linear(breakpoints, horizon, status, space, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn step1_segment_is_exact() {
        let l1: NormDescriptor = "euclid_l1:lambda=(0,1)".parse().unwrap();
        let f: ConvexFunction = "maxaff:[(-1,0.5|0),(-0.9,-0.45|0)]".parse().unwrap();
        let bc = 0.1 / 1.9 * 4.0;
        let tr = integrate_max_affine(&l1, &f, &[1.0, bc], 0.99).unwrap();
        assert_eq!(tr.breakpoints().len(), 2);
        assert_eq!(tr.status(), Status::HorizonReached);
        for k in 0..=99 {
            let t = 0.01 * k as f64;
            let p = tr.point_at(t).unwrap();
            assert_abs_diff_eq!(p[0], 1.0 + t, epsilon = 1e-12);
            assert_abs_diff_eq!(p[1], bc, epsilon = 1e-12);
        }
    }

    #[test]
    fn abs_value_reaches_kink_then_stops() {
        let e = NormDescriptor::euclidean(2).unwrap();
        let f: ConvexFunction = "maxaff:[(1,0|0),(-1,0|0)]".parse().unwrap();
        let tr = integrate_max_affine(&e, &f, &[2.0, 1.0], 5.0).unwrap();
        assert_eq!(tr.status(), Status::Stationary);
        let times = tr.times();
        assert_abs_diff_eq!(times[1], 2.0, epsilon = 1e-12);
        assert_eq!(*times.last().unwrap(), 5.0);
        assert_abs_diff_eq!(tr.point_at(1.0).unwrap()[0], 1.0, epsilon = 1e-14);
        let p = tr.point_at(4.0).unwrap();
        assert_abs_diff_eq!(p[0], 0.0, epsilon = 1e-12);
        assert_eq!(p[1], 1.0);
    }

    #[test]
    fn step4_upper_curve_on_lp4() {
        let lp4 = NormDescriptor::lp(4.0, 2).unwrap();
        let f: ConvexFunction = "maxaff:[(0.5,0|0),(0,1|0)]".parse().unwrap();
        let (a, s) = (0.5f64, 0.01);
        let r = (1.0 + a.powi(4)).powf(-0.25);
        let tr = integrate_max_affine(&lp4, &f, &[r, a * r + s], 0.999 * s).unwrap();
        for k in 0..=10 {
            let t = 0.0999 * s * k as f64;
            let p = tr.point_at(t).unwrap();
            assert_abs_diff_eq!(p[0], r, epsilon = 1e-12);
            assert_abs_diff_eq!(p[1], a * r + s - t, epsilon = 1e-12);
        }
    }

    #[test]
    fn slides_along_a_face() {
        // f = max{x¹, x², -x¹-x²-3}: from (1,1) the curve runs down the diagonal
        let e = NormDescriptor::euclidean(2).unwrap();
        let f: ConvexFunction = "maxaff:[(1,0|0),(0,1|0),(-1,-1|-3)]".parse().unwrap();
        let tr = integrate_max_affine(&e, &f, &[1.0, 1.0], 10.0).unwrap();
        let p = tr.point_at(2.0).unwrap();
        assert_abs_diff_eq!(p[0], p[1], epsilon = 1e-12);
        assert_abs_diff_eq!(p[0], 0.0, epsilon = 1e-12);
        assert_eq!(tr.status(), Status::Stationary);
        let end = tr.point_at(10.0).unwrap();
        assert_abs_diff_eq!(end[0], -1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(end[1], -1.0, epsilon = 1e-9);
    }

    #[test]
    fn event_equations_hold_at_breakpoints() {
        let e = NormDescriptor::euclidean(2).unwrap();
        let f: ConvexFunction = "maxaff:[(1,0.3|0),(-0.2,1|0.5),(-1,-1|-3)]".parse().unwrap();
        let tr = integrate_max_affine(&e, &f, &[3.0, -2.0], 10.0).unwrap();
        let pieces = f.flat_pieces().unwrap();
        for b in &tr.breakpoints()[1..tr.breakpoints().len() - 1] {
            let vals: Vec<f64> = pieces.iter().map(|p| p.eval(&b.point)).collect();
            let fx = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let close = vals.iter().filter(|v| (fx - *v).abs() <= 1e-12 * fx.abs().max(1.0)).count();
            assert!(close >= 2, "{vals:?}");
        }
    }

    #[test]
    fn rejects_smooth_functions() {
        let e = NormDescriptor::euclidean(2).unwrap();
        let q: ConvexFunction = "quad:A=[[1,0],[0,1]];b=(0,0);c=0".parse().unwrap();
        assert!(matches!(
            integrate_max_affine(&e, &q, &[1.0, 0.0], 1.0),
            Err(Error::WrongFamily { .. })
        ));
    }
}
