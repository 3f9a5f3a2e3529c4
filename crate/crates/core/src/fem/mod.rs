//! Quadrature, element integration and global assembly.

mod continuum;
mod dofs;
mod interface;
mod loads;
mod model;
mod quadrature;
mod sparse;

pub use continuum::{
    b_matrix, continuum_geometry, element_internal_force, element_stiffness, gauss_stress, mass_matrix, BasisPath,
    ContinuumGeometry, GaussPoint,
};
pub use dofs::DofMap;
pub use interface::{
    interface_element, interface_geometry, local_jump, InterfaceGeometry, InterfaceGp, InterfaceLaw, InterfaceOutput,
};
pub use loads::{external_force, FaceSide, FaceTraction, LoadSpec, PointLoad};
pub use model::{apply_constraints, reactions, GlobalSystem, Model, ModelSpec, ReducedSystem};
pub use quadrature::{gauss_legendre, QuadratureRule};
pub use sparse::CsrMatrix;

use crate::material::MaterialError;
use crate::mesh::MeshError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("element {element} is distorted (Jacobian determinant {det:e})")]
    DistortedElement { element: usize, det: f64 },
    #[error("interface element {element} has degenerate geometry")]
    DegenerateInterface { element: usize },
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}
