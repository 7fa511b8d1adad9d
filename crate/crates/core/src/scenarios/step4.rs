use super::{check_region, planar, require_plane, richardson, Family, Line, Scenario, StartPair, HORIZON_MARGIN, RICHARDSON_S};
use crate::error::{Error, Result};
use crate::functions::{AffinePiece, ConvexFunction};
use crate::norms::{NormDescriptor, NormFamily};
use serde_json::json;

/// Derivatives with smaller magnitude select no violating pairing.
const SIGN_TOL: f64 = 1e-12;

/// `f = max{ax¹, x²}` on `ℓp`.
pub fn step4_scenario(p: f64, a: f64, s: f64) -> Result<Scenario> {
    step4_on(&NormDescriptor::lp(p, 2)?, a, s)
}

/// The ball construction on any space whose unit sphere passes through `±e₁`, `±e₂`
/// with support lines parallel to the axes there.
///
/// With `r = 1/‖(1, a)‖` the pairs are `(0, −|a|s)`, `(r, ar + s)` ("main") and
/// `(−sgn(a)s, 0)`, `(r + as, ar)` ("primed").
pub fn step4_on(space: &NormDescriptor, a: f64, s: f64) -> Result<Scenario> {
    if !(a != 0.0 && a.is_finite()) {
        return Err(Error::param("a", "must be nonzero and finite"));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::param("s", "must be positive"));
    }
    let n = require_plane(space)?;
    check_axis_tangency(space, n)?;

    let f = ConvexFunction::max_affine(vec![
        AffinePiece::new(planar(n, a, 0.0), 0.0),
        AffinePiece::new(planar(n, 0.0, 1.0), 0.0),
    ])?;
    let r = 1.0 / space.eval(&planar(n, 1.0, a));
    let sg = a.signum();
    let sideways = planar(n, -a, 0.0);
    let downward = planar(n, 0.0, -1.0);

    let y_minus = planar(n, 0.0, -a.abs() * s);
    let y_plus = planar(n, r, a * r + s);
    let yp_minus = planar(n, -sg * s, 0.0);
    let yp_plus = planar(n, r + a * s, a * r);
    check_region(&f, &y_minus, 0, "y₋")?;
    check_region(&f, &y_plus, 1, "y₊")?;
    check_region(&f, &yp_minus, 1, "y′₋")?;
    check_region(&f, &yp_plus, 0, "y′₊")?;
    let main_horizon = s.min(s / a.abs()) * (1.0 - HORIZON_MARGIN);
    let primed_horizon = s.min(a.abs() * s) * (1.0 - HORIZON_MARGIN);

    let base = planar(n, r, a * r);
    let dir = planar(n, a, -1.0);
    let anti = planar(n, -a, 1.0);
    let derivative = space.norm_derivative(&base, &dir)?;
    let mirror = space.norm_derivative(&base, &anti)?;
    let main_variation = |s: f64| space.norm_derivative(&planar(n, r, a * r + s + a.abs() * s), &dir);
    let primed_variation = |s: f64| space.norm_derivative(&planar(n, r + a * s + sg * s, a * r), &anti);
    let main_rich = richardson([main_variation(RICHARDSON_S[0])?, main_variation(RICHARDSON_S[1])?, main_variation(RICHARDSON_S[2])?]);
    let primed_rich =
        richardson([primed_variation(RICHARDSON_S[0])?, primed_variation(RICHARDSON_S[1])?, primed_variation(RICHARDSON_S[2])?]);
    let selected = if derivative > SIGN_TOL {
        json!("main")
    } else if derivative < -SIGN_TOL {
        json!("primed")
    } else {
        json!(null)
    };

    let mut diagnostics: serde_json::Map<String, serde_json::Value> = [
        ("r", json!(r)),
        ("derivative", json!(derivative)),
        ("derivative_mirror", json!(mirror)),
        ("first_variation", json!(main_variation(s)?)),
        ("first_variation_primed", json!(primed_variation(s)?)),
        ("first_variation_richardson", json!(main_rich)),
        ("first_variation_primed_richardson", json!(primed_rich)),
        ("violating_pair", selected),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    if let NormFamily::Lp(p) = space.family() {
        let p = *p;
        if a > 0.0 {
            diagnostics.insert("closed_form_derivative".into(), json!(r.powf(p - 1.0) * (a - a.powf(p - 1.0))));
        }
    }

    let line = |origin: &Vec<f64>, velocity: &Vec<f64>| Line { origin: origin.clone(), velocity: velocity.clone() };
    Ok(Scenario {
        family: Family::Step4,
        params: [("a".to_string(), a), ("s".to_string(), s)].into_iter().collect(),
        space: space.clone(),
        function: f,
        start_points: vec![
            StartPair {
                label: "main".into(),
                expected: Some([line(&y_minus, &sideways), line(&y_plus, &downward)]),
                first: y_minus,
                second: y_plus,
                horizon: main_horizon,
            },
            StartPair {
                label: "primed".into(),
                expected: Some([line(&yp_minus, &downward), line(&yp_plus, &sideways)]),
                first: yp_minus,
                second: yp_plus,
                horizon: primed_horizon,
            },
        ],
        horizon: main_horizon.min(primed_horizon),
        diagnostics: diagnostics.into_iter().collect(),
    })
}

fn check_axis_tangency(space: &NormDescriptor, n: usize) -> Result<()> {
    for (i, sign) in [(0, 1.0), (0, -1.0), (1, 1.0), (1, -1.0)] {
        let mut e = vec![0.0; n];
        e[i] = sign;
        let ok = (space.eval(&e) - 1.0).abs() <= 1e-12
            && space
                .gradient(&e)
                .map(|g| g.iter().zip(&e).all(|(gi, ei)| (gi - ei).abs() <= 1e-9))
                .unwrap_or(false);
        if !ok {
            return Err(Error::NotApplicable(format!(
                "step4 needs unit support lines along the axes; {space} fails at {e:?}"
            )));
        }
    }
    Ok(())
}
