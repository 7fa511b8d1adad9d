use super::{check_region, planar, require_plane, Family, Line, Scenario, StartPair, HORIZON_MARGIN};
use crate::error::{Error, Result};
use crate::functions::{AffinePiece, ConvexFunction};
use crate::norms::NormDescriptor;
use serde_json::json;

/// The nonsmooth norm `|x|₂ + |x²|` used by the closed-form curves.
pub fn step1_space() -> NormDescriptor {
    NormDescriptor::euclid_plus_l1(vec![0.0, 1.0]).expect("valid weights")
}

/// `f = max{−x¹ + εx², c(−x¹ − εx²)}` on `|x|₂ + |x²|`, started from `±(1, b_c)`.
pub fn step1_scenario(eps: f64, c: f64) -> Result<Scenario> {
    step1_on(&step1_space(), eps, c)
}

/// The same function and start points on an arbitrary space.
///
/// Closed-form curves `ξ₊(t) = (1 + t, b_c)`, `ξ₋(t) = (−1 + ct, −b_c)` are attached
/// only on the canonical space.
pub fn step1_on(space: &NormDescriptor, eps: f64, c: f64) -> Result<Scenario> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param("eps", "must lie in (0, 1)"));
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::param("c", "must lie in (0, 1)"));
    }
    let n = require_plane(space)?;
    let b_c = (1.0 - c) / (1.0 + c) * 2.0 / eps;
    let g0 = planar(n, -1.0, eps);
    let g1 = planar(n, -c, -c * eps);
    let f = ConvexFunction::max_affine(vec![AffinePiece::new(g0, 0.0), AffinePiece::new(g1, 0.0)])?;
    let lower = planar(n, -1.0, -b_c);
    let upper = planar(n, 1.0, b_c);
    check_region(&f, &lower, 1, "(−1, −b_c)")?;
    check_region(&f, &upper, 0, "(1, b_c)")?;

    let horizon = 1.0 - HORIZON_MARGIN;
    let canonical = space == &step1_space();
    let expected = canonical.then(|| {
        [
            Line { origin: lower.clone(), velocity: planar(n, c, 0.0) },
            Line { origin: upper.clone(), velocity: planar(n, 1.0, 0.0) },
        ]
    });
    let d0 = space.eval(&planar(n, 2.0, 2.0 * b_c));
    let d_end = space.eval(&planar(n, 2.0 + (1.0 - c) * horizon, 2.0 * b_c));
    let mut diagnostics = serde_json::Map::new();
    diagnostics.insert("b_c".into(), json!(b_c));
    diagnostics.insert("canonical_space".into(), json!(canonical));
    if canonical {
        diagnostics.insert("closed_form_d0".into(), json!(d0));
        diagnostics.insert("closed_form_d_end".into(), json!(d_end));
        diagnostics.insert("closed_form_ratio".into(), json!(d_end / d0));
    }
    Ok(Scenario {
        family: Family::Step1,
        params: [("eps".to_string(), eps), ("c".to_string(), c)].into_iter().collect(),
        space: space.clone(),
        function: f,
        start_points: vec![StartPair { label: "main".into(), first: lower, second: upper, horizon, expected }],
        horizon,
        diagnostics: diagnostics.into_iter().collect(),
    })
}
