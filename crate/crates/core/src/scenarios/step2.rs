use super::{check_region, richardson, Family, Line, Scenario, StartPair, HORIZON_MARGIN, RICHARDSON_S};
use crate::error::{Error, Result};
use crate::functions::{AffinePiece, ConvexFunction};
use crate::norms::NormDescriptor;
use serde_json::json;

/// `|a|` at or below this makes the construction inconclusive.
pub const INCONCLUSIVE_A: f64 = 1e-9;

/// Horizontal tangencies of the unit sphere and the shear normalizing them.
struct Normalization {
    /// Top tangency, where the support line is horizontal.
    v: [f64; 2],
    /// Bottom tangency.
    w0: [f64; 2],
    a: f64,
    b: f64,
}

impl Normalization {
    fn locate(space: &NormDescriptor) -> Result<Self> {
        let v = space.dual_maximizer(&[0.0, 1.0])?;
        let w0 = space.dual_maximizer(&[0.0, -1.0])?;
        if !(v[1] > 0.0) || !(w0[1] < 0.0) {
            return Err(Error::Degenerate("horizontal tangency points not found".into()));
        }
        let shear = v[0] / v[1];
        let a = -(w0[0] - shear * w0[1]);
        let b = -w0[1] / v[1];
        Ok(Self { v: [v[0], v[1]], w0: [w0[0], w0[1]], a, b })
    }

    /// Original coordinates of the normalized point `y`.
    fn inverse(&self, y: [f64; 2]) -> Vec<f64> {
        vec![y[0] + self.v[0] * y[1], self.v[1] * y[1]]
    }
}

/// The symmetry construction on a smooth planar space.
///
/// In shear-normalized coordinates `T(x) = (x¹ − (v¹/v²)x², x²/v²)` the top
/// tangency is `(0, 1)` with support line `y² = 1` and the bottom one reads
/// `(−a, −b)`. The scenario uses `f = max{c b⁻¹ y², −b y²}` and the start pairs
/// `T⁻¹(∓1, ±s)` ("main") and `T⁻¹(∓1, ∓s)` ("mirror"), all expressed back in
/// the original coordinates.
pub fn step2_scenario(space: &NormDescriptor, c: f64, s: f64) -> Result<Scenario> {
    if space.dim() != 2 {
        return Err(Error::NotApplicable("step2 needs a planar space".into()));
    }
    if !space.is_smooth() {
        return Err(Error::NotApplicable(format!("step2 needs a smooth norm, got {space}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::param("c", "must be positive"));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::param("s", "must be positive"));
    }
    let nz = Normalization::locate(space)?;
    let (a, b) = (nz.a, nz.b);
    let v2 = nz.v[1];
    let f = ConvexFunction::max_affine(vec![
        AffinePiece::new(vec![0.0, c / (b * v2)], 0.0),
        AffinePiece::new(vec![0.0, -b / v2], 0.0),
    ])?;
    let up: Vec<f64> = nz.v.iter().map(|x| b * x).collect();
    let down: Vec<f64> = nz.w0.iter().map(|x| c * x).collect();
    let horizon = (s / b).min(s / (c * b)) * (1.0 - HORIZON_MARGIN);

    let main_first = nz.inverse([-1.0, s]);
    let main_second = nz.inverse([1.0, -s]);
    let mirror_first = nz.inverse([-1.0, -s]);
    let mirror_second = nz.inverse([1.0, s]);
    check_region(&f, &main_first, 0, "y₋")?;
    check_region(&f, &main_second, 1, "y₊")?;
    check_region(&f, &mirror_first, 1, "mirror start below the axis")?;
    check_region(&f, &mirror_second, 0, "mirror start above the axis")?;

    let toward: Vec<f64> = (0..2).map(|i| up[i] - down[i]).collect();
    let away: Vec<f64> = toward.iter().map(|x| -x).collect();
    let main_variation = |s: f64| space.norm_derivative(&nz.inverse([2.0, -2.0 * s]), &toward);
    let mirror_variation = |s: f64| space.norm_derivative(&nz.inverse([2.0, 2.0 * s]), &away);
    let main_limit = space.norm_derivative(&[2.0, 0.0], &toward)?;
    let mirror_limit = space.norm_derivative(&[2.0, 0.0], &away)?;
    let main_rich = richardson([main_variation(RICHARDSON_S[0])?, main_variation(RICHARDSON_S[1])?, main_variation(RICHARDSON_S[2])?]);
    let mirror_rich =
        richardson([mirror_variation(RICHARDSON_S[0])?, mirror_variation(RICHARDSON_S[1])?, mirror_variation(RICHARDSON_S[2])?]);

    let diagnostics = [
        ("v", json!(nz.v)),
        ("w0", json!(nz.w0)),
        ("normalization", json!("T(x) = (x1 - (v1/v2) x2, x2/v2)")),
        ("a", json!(a)),
        ("b", json!(b)),
        ("inconclusive", json!(a.abs() <= INCONCLUSIVE_A)),
        ("first_variation", json!(main_variation(s)?)),
        ("first_variation_mirror", json!(mirror_variation(s)?)),
        ("first_variation_limit", json!(main_limit)),
        ("first_variation_mirror_limit", json!(mirror_limit)),
        ("first_variation_richardson", json!(main_rich)),
        ("first_variation_mirror_richardson", json!(mirror_rich)),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();

    let line = |origin: &Vec<f64>, velocity: &Vec<f64>| Line { origin: origin.clone(), velocity: velocity.clone() };
    Ok(Scenario {
        family: Family::Step2,
        params: [("c".to_string(), c), ("s".to_string(), s)].into_iter().collect(),
        space: space.clone(),
        function: f,
        start_points: vec![
            StartPair {
                label: "main".into(),
                expected: Some([line(&main_first, &down), line(&main_second, &up)]),
                first: main_first,
                second: main_second,
                horizon,
            },
            StartPair {
                label: "mirror".into(),
                expected: Some([line(&mirror_first, &up), line(&mirror_second, &down)]),
                first: mirror_first,
                second: mirror_second,
                horizon,
            },
        ],
        horizon,
        diagnostics,
    })
}
