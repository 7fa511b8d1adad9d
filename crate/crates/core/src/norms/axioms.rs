use super::NormDescriptor;
use crate::linalg::{dot, euclid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

const REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomCheck {
    pub passed: bool,
    /// Largest relative violation seen; zero when the axiom held everywhere.
    pub worst_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymmetryWitness {
    pub x: Vec<f64>,
    pub norm_x: f64,
    pub norm_neg_x: f64,
}

/// Outcome of a randomized check of the norm axioms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub positivity: AxiomCheck,
    pub homogeneity: AxiomCheck,
    pub triangle: AxiomCheck,
    pub strict_convexity: AxiomCheck,
    pub symmetric: bool,
    pub strictly_convex: bool,
    pub asymmetry_witness: Option<AsymmetryWitness>,
    pub samples: usize,
    pub seed: u64,
}

impl AxiomReport {
    pub fn all_axioms_pass(&self) -> bool {
        self.positivity.passed && self.homogeneity.passed && self.triangle.passed
    }
}

#[derive(Default)]
struct Worst(f64);

impl Worst {
    fn see(&mut self, v: f64) {
        if v > self.0 {
            self.0 = v;
        }
    }
    fn check(&self) -> AxiomCheck {
        AxiomCheck { passed: self.0 <= REL_TOL, worst_violation: self.0 }
    }
}

impl NormDescriptor {
    /// Randomized verification of positivity, positive homogeneity, the triangle
    /// inequality, strict convexity and symmetry. Deterministic given `seed`.
    pub fn check_axioms(&self, samples: usize, seed: u64) -> AxiomReport {
        let samples = samples.max(1);
        let n = self.dim;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            let scale: f64 = 10f64.powf(rng.random_range(-2.0..2.0));
            (0..n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
        };

        let mut positivity = Worst::default();
        let mut homogeneity = Worst::default();
        let mut triangle = Worst::default();
        let mut strict = Worst::default();
        let mut asym = 0.0;
        let mut witness = None;

        positivity.see(self.eval(&vec![0.0; n]).abs());
        for _ in 0..samples {
            let x = draw(&mut rng);
            let y = draw(&mut rng);
            let nx = self.eval(&x);
            let ny = self.eval(&y);
            let ex = euclid(&x);
            if !(nx > 0.0) {
                positivity.see(1.0);
            }

            let c: f64 = 10f64.powf(rng.random_range(-3.0..3.0));
            let cx: Vec<f64> = x.iter().map(|v| c * v).collect();
            homogeneity.see((self.eval(&cx) - c * nx).abs() / (c * nx));

            let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            triangle.see(((self.eval(&s) - nx - ny) / (nx + ny)).max(0.0));

            // strict midpoint inequality on normalized, non-proportional pairs
            let ey = euclid(&y);
            let cos = dot(&x, &y) / (ex * ey);
            if cos < 1.0 - 1e-8 {
                let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a / nx + b / ny)).collect();
                let m = self.eval(&mid);
                strict.see((m - (1.0 - 1e-15)).max(0.0));
            }

            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            let nneg = self.eval(&neg);
            let a = (nx - nneg).abs() / nx.max(nneg);
            if a > asym {
                asym = a;
                let (w, wn, wneg) = if nx >= nneg { (x.clone(), nx, nneg) } else { (neg, nneg, nx) };
                witness = Some(AsymmetryWitness { x: w, norm_x: wn, norm_neg_x: wneg });
            }
        }

        let symmetric = asym <= REL_TOL;
        let strict = strict.check();
        AxiomReport {
            positivity: positivity.check(),
            homogeneity: homogeneity.check(),
            triangle: triangle.check(),
            strictly_convex: strict.passed,
            strict_convexity: strict,
            symmetric,
            asymmetry_witness: if symmetric { None } else { witness },
            samples,
            seed,
        }
    }
}
