//! B-spline and NURBS geometry kernel.

mod inversion;
pub mod io;
mod knots;
mod patch;
mod refine;

pub use inversion::point_inversion;
pub use knots::{BasisEval, KnotVector, Side, KNOT_TOL};
pub use patch::{Homogeneous, NurbsPatch, RationalBasis};
pub use refine::{elevate_degree, elevate_degrees, insert_knot, insert_knots, subdivide};

pub(crate) use patch::dist;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SplineError {
    #[error("parameter {value} lies outside the knot range [{lower}, {upper}]")]
    Domain { value: f64, lower: f64, upper: f64 },
    #[error("invalid knot vector: {0}")]
    InvalidKnots(String),
    #[error("invalid patch: {0}")]
    InvalidPatch(String),
    #[error("refinement error: {0}")]
    Refinement(String),
    #[error("point inversion did not converge (best residual {residual:e} at parameter {parameter})")]
    Inversion { residual: f64, parameter: f64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
