mod common;

use common::*;
use normflow::ConvexFunction;
use proptest::prelude::*;

fn any_function(n: usize) -> impl Strategy<Value = ConvexFunction> {
    prop_oneof![max_affine(n, 5), quadratic(n)]
}

fn lerp(x: &[f64], y: &[f64], s: f64) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| (1.0 - s) * a + s * b).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn convexity(f in any_function(3), x in vector(3), y in vector(3), s in 0.0..1.0f64) {
        let mid = f.eval(&lerp(&x, &y, s)).unwrap();
        let chord = (1.0 - s) * f.eval(&x).unwrap() + s * f.eval(&y).unwrap();
        prop_assert!(mid <= chord + 1e-12 * chord.abs().max(1.0));
    }

    #[test]
    fn k_convexity(f in quadratic(3), x in vector(3), y in vector(3), s in 0.0..1.0f64) {
        let k = f.k_modulus();
        let d = sub(&y, &x);
        let mid = f.eval(&lerp(&x, &y, s)).unwrap();
        let chord = (1.0 - s) * f.eval(&x).unwrap() + s * f.eval(&y).unwrap();
        prop_assert!(mid <= chord - 0.5 * k * (1.0 - s) * s * dot(&d, &d) + 1e-9);
    }

    #[test]
    fn subgradient_validity(s in planar_space(), f in any_function(2), x in vector(2), ys in prop::collection::vec(vector(2), 16)) {
        let alpha = f.min_dual_subgradient(&x, &s).unwrap();
        let fx = f.eval(&x).unwrap();
        for y in ys {
            let lower = fx + dot(&alpha, &sub(&y, &x));
            prop_assert!(f.eval(&y).unwrap() >= lower - 1e-12 * lower.abs().max(1.0));
        }
    }

    #[test]
    fn differential_matches_selection(s in planar_space(), f in any_function(2), x in vector(2)) {
        if let Ok(df) = f.differential(&x) {
            let alpha = f.min_dual_subgradient(&x, &s).unwrap();
            prop_assert!(max_abs(&sub(&df, &alpha)) <= 1e-12 * max_abs(&df).max(1.0));
        }
    }

    #[test]
    fn kink_subgradients_lie_in_the_hull(s in planar_space(), g in nonzero(2), h in nonzero(2)) {
        let f: ConvexFunction = format!("maxaff:[({},{}|0),({},{}|0)]", g[0], g[1], h[0], h[1]).parse().unwrap();
        let alpha = f.min_dual_subgradient(&[0.0, 0.0], &s).unwrap();
        let face = f.active_set(&[0.0, 0.0], None).unwrap();
        prop_assert_eq!(face.active.len(), 2);
        // α = (1−θ)g + θh for some θ ∈ [0,1]
        let d = sub(&h, &g);
        let theta = dot(&sub(&alpha, &g), &d) / dot(&d, &d);
        prop_assert!((-1e-9..=1.0 + 1e-9).contains(&theta));
        let back = lerp(&g, &h, theta);
        prop_assert!(max_abs(&sub(&back, &alpha)) <= 1e-9 * max_abs(&g).max(max_abs(&h)));
    }
}

#[test]
fn grammar_round_trip() {
    for s in [
        "maxaff:[(1,0|0),(-1,0.5|0.25)]",
        "quad:A=[[1,0],[0,2]];b=(0,0);c=0",
        "scale:c=2;f=maxaff:[(1,0|0)]",
    ] {
        let f: ConvexFunction = s.parse().unwrap();
        assert_eq!(f.to_string().parse::<ConvexFunction>().unwrap(), f);
    }
}
