//! Visualization meshes, Gauss-point extrapolation and legacy VTK output.

mod vis;
mod vtk;
#[cfg(test)]
mod tests;

pub use vis::{build_vis_mesh, extrapolate_fields, VisMesh};
pub use vtk::{
    continuum_document, field_file_name, interface_document, Attribute, Field, VtkDocument, VTK_HEXAHEDRON, VTK_LINE,
    VTK_QUAD, VTK_VERTEX,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PostError {
    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed VTK document: {0}")]
    Parse(String),
    #[error("inconsistent output data: {0}")]
    Consistency(String),
}
