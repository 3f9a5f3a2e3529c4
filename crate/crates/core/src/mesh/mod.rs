//! Analysis meshes over NURBS patches: continuum elements, discontinuity
//! insertion, interface elements and Bezier extraction.

mod connectivity;
mod discontinuity;
mod extraction;
mod interface;
pub mod io;

pub use connectivity::{build_connectivity, Element, IgaMesh};
pub use discontinuity::{insert_discontinuity, DiscontinuitySpec};
pub use extraction::{bernstein, bezier_extraction, extracted_basis, extraction_1d, tensor_bernstein, BezierExtractionSet};
pub use interface::{
    build_interface_connectivity, InterfaceElement, InterfaceKind, InterfaceMesh, InterfaceRequest, KindRange, Plane,
};

use crate::spline::SplineError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("mesh consistency: {0}")]
    Consistency(String),
    #[error(transparent)]
    Spline(#[from] SplineError),
}
