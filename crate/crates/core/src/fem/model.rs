use nalgebra::DMatrix;
use rayon::prelude::*;

use super::continuum::{continuum_geometry, element_stiffness, gauss_stress, mass_matrix, BasisPath, ContinuumGeometry};
use super::dofs::DofMap;
use super::interface::{interface_element, interface_geometry, InterfaceGeometry, InterfaceLaw};
use super::loads::{external_force, LoadSpec};
use super::sparse::CsrMatrix;
use super::FemError;
use crate::material::{elasticity_matrix_in_frame, CohesiveParams, CohesiveState, ContactParams, PlyElasticity, Regime};
use crate::mesh::{bezier_extraction, IgaMesh, InterfaceKind, InterfaceMesh};

/// Everything needed to set up a discrete model.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub mesh: IgaMesh,
    pub interfaces: InterfaceMesh,
    pub regime: Regime,
    /// Out-of-plane width for 2D models (mm); ignored in 3D.
    pub thickness: f64,
    /// Ply materials indexed by `Element::material`.
    pub plies: Vec<PlyElasticity>,
    /// Cohesive parameters indexed by interface group.
    pub cohesive: Vec<CohesiveParams>,
    pub contact: ContactParams,
    pub dofs: DofMap,
    pub loads: LoadSpec,
    /// Parametric direction whose tangent carries the 0-degree fibre; the
    /// laminate is then stacked in the (x, y) plane (also in 3D).
    pub frame_dir: Option<usize>,
    pub basis: BasisPath,
}

/// Discrete model with cached geometry and the (linear) continuum stiffness.
#[derive(Debug, Clone)]
pub struct Model {
    pub spec: ModelSpec,
    pub dim: usize,
    pub continuum: Vec<ContinuumGeometry>,
    /// Constitutive matrix per element and Gauss point.
    pub cmats: Vec<Vec<DMatrix<f64>>>,
    pub interface_geometry: Vec<InterfaceGeometry>,
    /// External force pattern over all unknowns.
    pub f_hat: Vec<f64>,
    element_dofs: Vec<Vec<usize>>,
    interface_dofs: Vec<Vec<usize>>,
    /// Continuum stiffness on the full pattern (interface couplings zero).
    k_cont: CsrMatrix,
}

/// Assembled state at a trial displacement.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub tangent: CsrMatrix,
    pub f_int: Vec<f64>,
    /// Trial cohesive states per interface element and Gauss point.
    pub states: Vec<Vec<CohesiveState>>,
    /// Total dissipated energy of the trial states (N mm).
    pub dissipated: f64,
}

fn point_dofs(conn: &[usize], nc: usize) -> Vec<usize> {
    conn.iter().flat_map(|&p| (0..nc).map(move |c| p * nc + c)).collect()
}

impl Model {
    pub fn new(spec: ModelSpec) -> Result<Self, FemError> {
        let dim = spec.mesh.param_dim();
        if spec.dofs.ncomp != dim || spec.dofs.npoints != spec.mesh.num_points() {
            return Err(FemError::Config("unknown map does not match the mesh".into()));
        }
        let expected_regime = if dim == 2 { Regime::PlaneStrain } else { Regime::ThreeD };
        if spec.regime != expected_regime {
            return Err(FemError::Config(format!("regime {:?} does not match a {dim}D mesh", spec.regime)));
        }
        for e in &spec.interfaces.elements {
            if e.kind == InterfaceKind::Cohesive && e.group >= spec.cohesive.len() {
                return Err(FemError::Config(format!("no cohesive parameters for interface group {}", e.group)));
            }
        }
        for c in &spec.cohesive {
            c.validate()?;
        }
        if spec.interfaces.elements.iter().any(|e| e.kind == InterfaceKind::Contact) {
            spec.contact.validate()?;
        }
        let thickness = if dim == 2 { spec.thickness } else { 1.0 };
        let ext = match spec.basis {
            BasisPath::Extraction => Some(bezier_extraction(&spec.mesh)),
            BasisPath::Direct => None,
        };
        let mesh = &spec.mesh;
        let continuum = mesh
            .elements
            .par_iter()
            .map(|e| {
                let op = ext.as_ref().map(|x| x.element_operator(e));
                continuum_geometry(mesh, e, op.as_ref(), thickness, spec.frame_dir)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let cmats = mesh
            .elements
            .iter()
            .zip(&continuum)
            .map(|(e, g)| {
                let ply = spec
                    .plies
                    .get(e.material)
                    .ok_or_else(|| FemError::Config(format!("element {} references missing material {}", e.id, e.material)))?;
                g.gps
                    .iter()
                    .map(|gp| elasticity_matrix_in_frame(ply, e.ply_angle, spec.regime, gp.frame).map_err(FemError::from))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let interface_geometry = spec
            .interfaces
            .elements
            .par_iter()
            .map(|ie| {
                let op = ext.as_ref().map(|x| x.face_operator(ie));
                interface_geometry(mesh, ie, op.as_ref(), thickness)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let nc = dim;
        let element_dofs: Vec<Vec<usize>> = mesh.elements.iter().map(|e| point_dofs(&e.conn, nc)).collect();
        let interface_dofs: Vec<Vec<usize>> = spec.interfaces.elements.iter().map(|e| point_dofs(&e.conn, nc)).collect();
        let mut k_cont = CsrMatrix::from_element_dofs(
            spec.dofs.len(),
            element_dofs.iter().chain(&interface_dofs).map(|v| v.as_slice()),
        );
        let blocks: Vec<DMatrix<f64>> = continuum
            .par_iter()
            .zip(&cmats)
            .map(|(g, c)| element_stiffness(g, c, dim))
            .collect();
        for (dofs, kb) in element_dofs.iter().zip(&blocks) {
            // DMatrix is column-major; element blocks are symmetric
            k_cont.add_block(dofs, kb.as_slice());
        }
        let f_hat = external_force(&spec.loads, mesh, &spec.dofs, thickness)?;
        Ok(Self { spec, dim, continuum, cmats, interface_geometry, f_hat, element_dofs, interface_dofs, k_cont })
    }

    pub fn ndofs(&self) -> usize {
        self.spec.dofs.len()
    }

    pub fn dofs(&self) -> &DofMap {
        &self.spec.dofs
    }

    pub fn initial_states(&self) -> Vec<Vec<CohesiveState>> {
        self.interface_geometry.iter().map(|g| vec![CohesiveState::default(); g.gps.len()]).collect()
    }

    /// Continuum stiffness on the full sparsity pattern.
    pub fn continuum_stiffness(&self) -> &CsrMatrix {
        &self.k_cont
    }

    fn law(&self, k: usize) -> InterfaceLaw<'_> {
        let ie = &self.spec.interfaces.elements[k];
        match ie.kind {
            InterfaceKind::Cohesive => InterfaceLaw::Cohesive(&self.spec.cohesive[ie.group]),
            InterfaceKind::Contact => InterfaceLaw::Contact(&self.spec.contact),
        }
    }

    /// Tangent, internal force and trial states at displacement `u`,
    /// starting from committed `states`.
    pub fn assemble(&self, u: &[f64], states: &[Vec<CohesiveState>]) -> GlobalSystem {
        let mut tangent = self.k_cont.clone();
        let mut f_int = self.k_cont.mul_vec(u);
        let outputs: Vec<_> = (0..self.interface_geometry.len())
            .into_par_iter()
            .map(|k| {
                let ue: Vec<f64> = self.interface_dofs[k].iter().map(|&d| u[d]).collect();
                interface_element(&self.interface_geometry[k], self.law(k), &states[k], &ue, self.dim)
            })
            .collect();
        let mut new_states = Vec::with_capacity(outputs.len());
        let mut dissipated = 0.0;
        for (k, out) in outputs.into_iter().enumerate() {
            let dofs = &self.interface_dofs[k];
            tangent.add_block(dofs, &out.k);
            for (i, &d) in dofs.iter().enumerate() {
                f_int[d] += out.f[i];
            }
            dissipated += out.dissipated;
            new_states.push(if out.states.is_empty() { states[k].clone() } else { out.states });
        }
        GlobalSystem { tangent, f_int, states: new_states, dissipated }
    }

    /// Area-weighted dissipated energy stored in `states`.
    pub fn dissipated_energy(&self, states: &[Vec<CohesiveState>]) -> f64 {
        self.interface_geometry
            .iter()
            .zip(states)
            .map(|(g, s)| g.gps.iter().zip(s).map(|(gp, st)| gp.da * st.dissipated).sum::<f64>())
            .sum()
    }

    /// Gauss-point stresses per element.
    pub fn stresses(&self, u: &[f64]) -> Vec<Vec<Vec<f64>>> {
        self.continuum
            .par_iter()
            .zip(&self.cmats)
            .zip(&self.element_dofs)
            .map(|((g, c), dofs)| {
                let ue: Vec<f64> = dofs.iter().map(|&d| u[d]).collect();
                g.gps.iter().zip(c).map(|(gp, cm)| gauss_stress(gp, cm, self.dim, &ue)).collect()
            })
            .collect()
    }

    /// Consistent mass matrix (requires ply densities).
    pub fn mass(&self) -> Result<CsrMatrix, FemError> {
        let mut m = self.k_cont.clone();
        m.clear();
        for ((e, g), dofs) in self.spec.mesh.elements.iter().zip(&self.continuum).zip(&self.element_dofs) {
            let rho = self.spec.plies[e.material].density;
            if !(rho > 0.0) {
                return Err(FemError::Config(format!("element {} has non-positive density", e.id)));
            }
            let me = mass_matrix(g, rho, self.dim);
            m.add_block(dofs, me.as_slice());
        }
        Ok(m)
    }

    /// Smallest interface element area, used for control-switch thresholds.
    pub fn min_interface_area(&self) -> Option<f64> {
        self.interface_geometry
            .iter()
            .zip(&self.spec.interfaces.elements)
            .filter(|(_, e)| e.kind == InterfaceKind::Cohesive)
            .map(|(g, _)| g.area())
            .min_by(|a, b| a.total_cmp(b))
    }
}

/// System restricted to the free unknowns.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub k_ff: CsrMatrix,
    pub free: Vec<usize>,
    /// Global unknown -> free index (`usize::MAX` when constrained).
    pub map: Vec<usize>,
}

/// Condenses the constrained unknowns out of the tangent.
pub fn apply_constraints(tangent: &CsrMatrix, dofs: &DofMap) -> ReducedSystem {
    let free = dofs.free_dofs();
    let mut map = vec![usize::MAX; dofs.len()];
    for (i, &d) in free.iter().enumerate() {
        map[d] = i;
    }
    ReducedSystem { k_ff: tangent.restrict(&map, free.len()), free, map }
}

/// Reactions `f_int - lambda f_hat` at every constrained unknown.
pub fn reactions(f_int: &[f64], f_hat: &[f64], lambda: f64, dofs: &DofMap) -> Vec<(usize, f64)> {
    dofs.constrained_dofs().into_iter().map(|d| (d, f_int[d] - lambda * f_hat[d])).collect()
}
