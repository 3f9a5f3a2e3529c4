use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::MaterialError;

/// Frictionless penalty contact across a crack face.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactParams {
    /// N/mm^3
    pub penalty: f64,
}

impl ContactParams {
    pub fn validate(&self) -> Result<(), MaterialError> {
        if self.penalty.is_finite() && self.penalty > 0.0 {
            Ok(())
        } else {
            Err(MaterialError::Parameter(format!("contact penalty must be positive, got {}", self.penalty)))
        }
    }
}

/// Local traction and tangent for jump `(s1, s2, n)`; only closing normal
/// jumps are resisted.
pub fn contact_update(params: &ContactParams, jump: &Vector3<f64>) -> (Vector3<f64>, Matrix3<f64>) {
    let mut t = Vector3::zeros();
    let mut k = Matrix3::zeros();
    if jump[2] < 0.0 {
        t[2] = params.penalty * jump[2];
        k[(2, 2)] = params.penalty;
    }
    (t, k)
}
