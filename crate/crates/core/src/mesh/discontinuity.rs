use super::MeshError;
use crate::spline::{insert_knot, NurbsPatch, KNOT_TOL};

/// Where to weaken continuity along one parametric direction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiscontinuitySpec {
    /// Parametric axis crossing the interfaces.
    pub direction: usize,
    /// Locations that become C^-1 (multiplicity p+1, duplicated control points).
    pub cohesive_at: Vec<f64>,
    /// Locations that become C^0 (multiplicity p), e.g. ply interfaces.
    pub c0_at: Vec<f64>,
}

impl DiscontinuitySpec {
    pub fn validate(&self, patch: &NurbsPatch) -> Result<(), MeshError> {
        if self.direction >= patch.param_dim() {
            return Err(MeshError::Consistency(format!("direction {} out of range", self.direction)));
        }
        let kv = patch.knot(self.direction);
        for &x in self.cohesive_at.iter().chain(&self.c0_at) {
            if !(x > kv.first() + KNOT_TOL && x < kv.last() - KNOT_TOL) {
                return Err(MeshError::Consistency(format!("location {x} is not strictly interior")));
            }
        }
        Ok(())
    }
}

/// Raises multiplicities: `p` at C^0 locations, `p+1` at C^-1 locations.
/// Locations already at (or above) their target are left untouched.
pub fn insert_discontinuity(patch: &NurbsPatch, spec: &DiscontinuitySpec) -> Result<NurbsPatch, MeshError> {
    spec.validate(patch)?;
    let d = spec.direction;
    let p = patch.knot(d).degree();
    let mut out = patch.clone();
    let targets = spec.c0_at.iter().map(|&x| (x, p)).chain(spec.cohesive_at.iter().map(|&x| (x, p + 1)));
    for (x, target) in targets {
        let m = out.knot(d).multiplicity(x);
        if m < target {
            out = insert_knot(&out, d, x, target - m)?;
        }
    }
    Ok(out)
}
