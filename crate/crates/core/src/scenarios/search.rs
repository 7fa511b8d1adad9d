use super::{Family, Params, Scenario};
use crate::error::{Error, Result};
use crate::grammar::{parse_f64, split_top};
use crate::norms::NormDescriptor;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Named parameter lists, expanded as a Cartesian product.
///
/// Grammar: `name=v1,v2,...` or `name=start:stop:count`, separated by `;`,
/// for example `eps=0.1:0.9:9;c=0.5,0.9`.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ParameterGrid {
    pub axes: BTreeMap<String, Vec<f64>>,
}

impl ParameterGrid {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, values: Vec<f64>) -> Self {
        self.axes.insert(name.to_string(), values);
        self
    }

    pub fn len(&self) -> usize {
        if self.axes.is_empty() {
            0
        } else {
            self.axes.values().map(Vec::len).product()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All grid points; the last axis in name order varies fastest.
    pub fn points(&self) -> Vec<Params> {
        let mut out: Vec<Params> = if self.axes.is_empty() { vec![] } else { vec![Params::new()] };
        for (name, values) in &self.axes {
            out = out
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.insert(name.clone(), *v);
                        q
                    })
                })
                .collect();
        }
        out
    }
}

impl FromStr for ParameterGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut grid = ParameterGrid::new();
        for item in split_top(s, ';').into_iter().map(str::trim).filter(|t| !t.is_empty()) {
            let (name, spec) = item
                .split_once('=')
                .ok_or_else(|| Error::parse(item, "expected name=values"))?;
            let name = name.trim();
            if name.is_empty() {
                return Err(Error::parse(item, "empty parameter name"));
            }
            let values = if spec.contains(':') {
                let parts: Vec<&str> = spec.split(':').collect();
                if parts.len() != 3 {
                    return Err(Error::parse(spec, "ranges look like start:stop:count"));
                }
                let (lo, hi) = (parse_f64(parts[0])?, parse_f64(parts[1])?);
                let count: usize = parts[2]
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(parts[2], "count must be a positive integer"))?;
                match count {
                    0 => return Err(Error::parse(spec, "count must be positive")),
                    1 => vec![lo],
                    _ => (0..count)
                        .map(|k| if k + 1 == count { hi } else { lo + (hi - lo) * k as f64 / (count - 1) as f64 })
                        .collect(),
                }
            } else {
                spec.split(',').map(parse_f64).collect::<Result<Vec<_>>>()?
            };
            if grid.axes.insert(name.to_string(), values).is_some() {
                return Err(Error::parse(item, format!("parameter `{name}` given twice")));
            }
        }
        Ok(grid)
    }
}

impl fmt::Display for ParameterGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self
            .axes
            .iter()
            .map(|(k, v)| format!("{k}={}", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        f.write_str(&items.join(";"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub family: Family,
    pub space: NormDescriptor,
    pub max_ratio: f64,
    pub argmax_params: Params,
    pub time_of_max: f64,
    /// Label of the start pair realizing the ratio.
    pub pair: String,
    pub violation: bool,
    pub evaluated: usize,
}

impl Witness {
    /// Re-runs the maximizing scenario and returns its ratio.
    pub fn reproduce(&self) -> Result<f64> {
        Ok(Scenario::build(self.family, &self.space, &self.argmax_params)?.run()?.max_ratio)
    }
}

/// Runs every grid scenario and returns the one with the largest distance ratio.
///
/// Grid points are evaluated in parallel; ties go to the earliest point, so the
/// result does not depend on scheduling.
pub fn search_witness(space: &NormDescriptor, family: Family, grid: &ParameterGrid) -> Result<Witness> {
    let points = grid.points();
    if points.is_empty() {
        return Err(Error::Empty("witness grid"));
    }
    let runs: Vec<Result<(Params, f64, f64, String, bool)>> = points
        .par_iter()
        .map(|p| {
            let sc = Scenario::build(family, space, p)?;
            let run = sc.run()?;
            Ok((sc.params, run.max_ratio, run.time_of_max, run.argmax_pair, run.violation))
        })
        .collect();
    let mut best: Option<(Params, f64, f64, String, bool)> = None;
    let mut any_violation = false;
    for r in runs {
        let r = r?;
        any_violation |= r.4;
        if best.as_ref().map_or(true, |b| r.1 > b.1) {
            best = Some(r);
        }
    }
    let (argmax_params, max_ratio, time_of_max, pair, _) = best.expect("nonempty grid");
    Ok(Witness {
        family,
        space: space.clone(),
        max_ratio,
        argmax_params,
        time_of_max,
        pair,
        violation: any_violation,
        evaluated: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn grid_grammar() {
        let g: ParameterGrid = "eps=0.1:0.9:9;c=0.5,0.9".parse().unwrap();
        assert_eq!(g.axes["eps"].len(), 9);
        assert_abs_diff_eq!(g.axes["eps"][4], 0.5, epsilon = 1e-15);
        assert_eq!(g.axes["eps"][8], 0.9);
        assert_eq!(g.len(), 18);
        let pts = g.points();
        assert_eq!(pts.len(), 18);
        assert_eq!(pts[0]["c"], 0.5);
        assert_eq!(pts[1]["c"], 0.5);
        assert_eq!(pts[9]["c"], 0.9);
        let again: ParameterGrid = g.to_string().parse().unwrap();
        assert_eq!(again, g);
        assert!("eps=0.1:0.9".parse::<ParameterGrid>().is_err());
        assert!("eps=0.1;eps=0.2".parse::<ParameterGrid>().is_err());
        assert!("eps".parse::<ParameterGrid>().is_err());
        assert!("".parse::<ParameterGrid>().unwrap().is_empty());
    }

    #[test]
    fn euclidean_step4_never_violates() {
        let e = NormDescriptor::euclidean(2).unwrap();
        let g: ParameterGrid = "a=0.1:0.9:9".parse().unwrap();
        let w = search_witness(&e, Family::Step4, &g).unwrap();
        assert_eq!(w.max_ratio, 1.0);
        assert!(!w.violation);
    }

    #[test]
    fn lp4_step4_witness() {
        let lp4 = NormDescriptor::lp(4.0, 2).unwrap();
        let g: ParameterGrid = "a=0.1:0.9:9;s=0.01".parse().unwrap();
        let w = search_witness(&lp4, Family::Step4, &g).unwrap();
        assert!(w.max_ratio > 1.0);
        assert!(w.violation);
        assert_abs_diff_eq!(w.reproduce().unwrap(), w.max_ratio, epsilon = 1e-9);
    }

    #[test]
    fn search_is_deterministic() {
        let l1 = NormDescriptor::euclid_plus_l1(vec![0.0, 1.0]).unwrap();
        let g: ParameterGrid = "eps=0.1:0.9:5;c=0.5,0.9,0.99".parse().unwrap();
        let a = search_witness(&l1, Family::Step1, &g).unwrap();
        let b = search_witness(&l1, Family::Step1, &g).unwrap();
        assert_eq!(a, b);
        assert!(a.max_ratio > 1.0);
    }

    #[test]
    fn empty_grid_is_an_error() {
        let e = NormDescriptor::euclidean(2).unwrap();
        assert!(search_witness(&e, Family::Step4, &ParameterGrid::new()).is_err());
    }
}
