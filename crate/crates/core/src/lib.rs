//! Gradient flows of convex functions on possibly asymmetric normed spaces
//! `(ℝⁿ, ‖·‖)` and numerical tests of their contraction behaviour.
//!
//! The crate is organized bottom-up:
//!
//! * [`norms`]: the four built-in norm families with dual norms, the Legendre
//!   transform, metric tensors and axiom checks,
//! * [`functions`]: max-of-affine and quadratic convex functions with
//!   subdifferentials and minimal-dual-norm subgradients,
//! * [`flow`]: exact event-driven integration for max-of-affine functions, an
//!   adaptive Dormand–Prince integrator for smooth ones, and energy-dissipation
//!   residuals,
//! * [`contraction`]: distance profiles between gradient curves and the
//!   contraction diagnostics built on them,
//! * [`scenarios`]: the packaged counterexample constructions and witness search.

pub mod contraction;
pub mod error;
pub mod flow;
pub mod functions;
mod grammar;
pub mod io;
mod linalg;
pub mod norms;
pub mod scenarios;


pub use error::{Error, Result};


pub use functions::{AffinePiece, ConvexFunction, SubdifferentialFace};
pub use contraction::{ContractionReport, DistanceProfile};
pub use flow::{EdiReport, Status, Trajectory};
pub use scenarios::{Family, ParameterGrid, Scenario, Witness};
pub use norms::{AxiomReport, MetricTensor, NormDescriptor, NormFamily};


/// Parses a comma-separated list of numbers such as `1,0.5,-2`.
pub fn parse_point(s: &str) -> Result<Vec<f64>> {
    grammar::parse_tuple(s)
}
