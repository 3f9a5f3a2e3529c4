//! Constitutive models: ply elasticity, bilinear mixed-mode cohesive law and
//! penalty contact.

mod cohesive;
mod contact;
mod elastic;

pub use cohesive::{cohesive_update, CohesiveParams, CohesiveResponse, CohesiveState};
pub use contact::{contact_update, ContactParams};
pub use elastic::{elasticity_matrix, elasticity_matrix_in_frame, rotate_stiffness, PlyElasticity, Regime};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaterialError {
    #[error("material parameter error: {0}")]
    Parameter(String),
}
