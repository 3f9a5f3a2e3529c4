use std::collections::BTreeMap;

use super::FemError;

/// Displacement unknowns: `ncomp` per control point, point-major.
///
/// Constrained unknowns are either fixed at a constant value or driven,
/// i.e. prescribed as `lambda * pattern`.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub ncomp: usize,
    pub npoints: usize,
    fixed: BTreeMap<usize, f64>,
    driven: BTreeMap<usize, f64>,
}

impl DofMap {
    pub fn new(npoints: usize, ncomp: usize) -> Self {
        Self { ncomp, npoints, fixed: BTreeMap::new(), driven: BTreeMap::new() }
    }

    pub fn len(&self) -> usize {
        self.npoints * self.ncomp
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dof(&self, point: usize, comp: usize) -> usize {
        point * self.ncomp + comp
    }

    fn check(&self, point: usize, comp: usize) -> Result<usize, FemError> {
        if point >= self.npoints || comp >= self.ncomp {
            return Err(FemError::Config(format!("constraint on nonexistent unknown ({point}, {comp})")));
        }
        Ok(self.dof(point, comp))
    }

    /// Fixes an unknown at `value`. Repeating the same value is allowed.
    pub fn fix(&mut self, point: usize, comp: usize, value: f64) -> Result<(), FemError> {
        let k = self.check(point, comp)?;
        if self.driven.contains_key(&k) || self.fixed.get(&k).is_some_and(|&v| v != value) {
            return Err(FemError::Config(format!("conflicting prescriptions on point {point} component {comp}")));
        }
        self.fixed.insert(k, value);
        Ok(())
    }

    /// Prescribes `u = lambda * pattern` on an unknown.
    pub fn drive(&mut self, point: usize, comp: usize, pattern: f64) -> Result<(), FemError> {
        let k = self.check(point, comp)?;
        if self.fixed.contains_key(&k) || self.driven.get(&k).is_some_and(|&v| v != pattern) {
            return Err(FemError::Config(format!("conflicting prescriptions on point {point} component {comp}")));
        }
        self.driven.insert(k, pattern);
        Ok(())
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.fixed.contains_key(&dof) || self.driven.contains_key(&dof)
    }

    pub fn fixed(&self) -> &BTreeMap<usize, f64> {
        &self.fixed
    }

    pub fn driven(&self) -> &BTreeMap<usize, f64> {
        &self.driven
    }

    pub fn has_drivers(&self) -> bool {
        !self.driven.is_empty()
    }

    pub fn free_dofs(&self) -> Vec<usize> {
        (0..self.len()).filter(|d| !self.is_constrained(*d)).collect()
    }

    pub fn constrained_dofs(&self) -> Vec<usize> {
        (0..self.len()).filter(|d| self.is_constrained(*d)).collect()
    }

    /// Full-length vector of the driver pattern (zero elsewhere).
    pub fn driver_pattern(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.len()];
        for (&k, &p) in &self.driven {
            v[k] = p;
        }
        v
    }

    /// Writes the prescribed values for load factor `lambda` into `u`.
    pub fn impose(&self, u: &mut [f64], lambda: f64) {
        for (&k, &v) in &self.fixed {
            u[k] = v;
        }
        for (&k, &p) in &self.driven {
            u[k] = lambda * p;
        }
    }
}
