use super::{check_horizon, Breakpoint, DenseStep, Status, Trajectory, STATIONARY_TOL};
use crate::error::{check_dim, Error, Result};
use crate::functions::ConvexFunction;
use crate::linalg::{max_abs, neg};
use crate::norms::NormDescriptor;

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Adaptive Dormand–Prince 5(4) integration of `ξ̇ = 𝓛(−df(ξ))`.
///
/// A step of length `h` is accepted when the embedded error estimate is at most
/// `tol·h·max(1, |ξ|∞)`. Integration stops early with [`Status::StepFloor`] when the
/// step falls below `1e−14·max(1, t)`, and continues as a constant curve once the
/// slope drops below [`STATIONARY_TOL`].
pub fn integrate_smooth(
    space: &NormDescriptor,
    f: &ConvexFunction,
    x0: &[f64],
    horizon: f64,
    tol: f64,
) -> Result<Trajectory> {
    check_dim(space.dim(), x0)?;
    check_dim(f.dim(), x0)?;
    check_horizon(horizon)?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::param("tol", "tolerance must be positive"));
    }
    if f.is_piecewise_affine() {
        return Err(Error::WrongFamily { expected: "a smooth (quadratic) function" });
    }
    let n = x0.len();
    let covector = |y: &[f64]| -> Result<Vec<f64>> { Ok(neg(&f.differential(y)?)) };
    let rhs = |y: &[f64]| -> Result<Vec<f64>> { Ok(space.legendre_unchecked(&covector(y)?)) };

    let mut t = 0.0f64;
    let mut y = x0.to_vec();
    let mut k1 = rhs(&y)?;
    let mut breakpoints = vec![Breakpoint { time: 0.0, point: y.clone(), velocity: k1.clone() }];
    let mut steps = Vec::new();
    let mut status = Status::HorizonReached;
    let speed = max_abs(&k1);
    let mut h = if speed > 0.0 { (0.01 * max_abs(&y).max(1.0) / speed).min(horizon) } else { horizon };
    let mut stationary = space.dual_eval(&covector(&y)?) <= STATIONARY_TOL;

    while t < horizon && !stationary {
        if h < 1e-14 * t.abs().max(1.0) {
            status = Status::StepFloor;
            break;
        }
        let last = h >= horizon - t;
        if last {
            h = horizon - t;
        }
        let mut k: Vec<Vec<f64>> = vec![k1.clone()];
        for s in 1..7 {
            let stage: Vec<f64> = (0..n)
                .map(|i| y[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>())
                .collect();
            k.push(rhs(&stage)?);
        }
        let y5: Vec<f64> = (0..n)
            .map(|i| y[i] + h * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>())
            .collect();
        let err_vec: Vec<f64> = (0..n).map(|i| h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>()).collect();
        let scale = tol * h * max_abs(&y).max(max_abs(&y5)).max(1.0);
        let err = max_abs(&err_vec) / scale;

        if err <= 1.0 && err.is_finite() {
            let r2: Vec<f64> = (0..n).map(|i| y5[i] - y[i]).collect();
            let r3: Vec<f64> = (0..n).map(|i| h * k[0][i] - r2[i]).collect();
            let r4: Vec<f64> = (0..n).map(|i| r2[i] - h * k[6][i] - r3[i]).collect();
            let r5: Vec<f64> = (0..n).map(|i| h * (0..7).map(|j| D[j] * k[j][i]).sum::<f64>()).collect();
            steps.push(DenseStep { t, h, r: [y.clone(), r2, r3, r4, r5] });
            t = if last { horizon } else { t + h };
            y = y5;
            k1 = k[6].clone();
            breakpoints.push(Breakpoint { time: t, point: y.clone(), velocity: k1.clone() });
            stationary = space.dual_eval(&covector(&y)?) <= STATIONARY_TOL;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.25)).clamp(0.2, 5.0) };
        h *= if err <= 1.0 { factor } else { factor.min(1.0) };
        if !h.is_finite() {
            h = horizon;
        }
    }

    if stationary {
        status = Status::Stationary;
        if t < horizon {
            breakpoints.last_mut().unwrap().velocity = vec![0.0; n];
            steps.push(DenseStep::constant(t, horizon - t, &y));
            breakpoints.push(Breakpoint { time: horizon, point: y.clone(), velocity: vec![0.0; n] });
        }
    }
    Ok(Trajectory::dense(breakpoints, steps, horizon, status, space, f))
}
