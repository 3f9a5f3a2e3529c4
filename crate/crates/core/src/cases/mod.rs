//! Benchmark geometries, analytic oracles, case configuration and the
//! command-line driver.

pub mod cli;
mod config;
mod curved;
mod dcb;
mod lshape;
mod mmb;
mod oracle;
mod run;
mod verify;

pub use config::{
    builtin_case, builtin_cases, CaseConfig, CaseInfo, CohesiveConfig, ContactConfig, FieldOutput, GeometryConfig,
    LayupConfig, MaterialsConfig, MeshConfig, OutputConfig, PlyConfig,
};
pub use curved::{build_curved_laminate, curved_base_curve, offset_curve, CurvedLaminateParams, OffsetReport};
pub use dcb::{build_dcb3d, DcbParams};
pub use lshape::{build_lshape, lshape_patch, CrackTips, LShapeParams, LShapeSupport};
pub use mmb::{build_mmb, mmb_load_ratio, MmbParams};
pub use oracle::{oracle_dcb, oracle_mmb, DcbOracleParams, MmbOracle, MmbOracleParams, OracleCurve, OraclePoint, Regime as CurveRegime};
pub use verify::{
    compare_dcb, compare_mmb, dcb_oracle_params, initial_stiffness, mmb_oracle_params, mmb_post_peak, snap_backs,
    verify_trace, Check, VerifyReport, SNAP_BACK_TOLERANCE,
};
pub use run::{build_benchmark, build_model, mesh_document, run_case, sha256_hex, BuiltCase, CaseRun, Manifest, RunOptions};

use crate::fem::{DofMap, FemError, LoadSpec, Model, ModelSpec};
use crate::material::{CohesiveParams, ContactParams, PlyElasticity};
use crate::mesh::{IgaMesh, InterfaceMesh, MeshError};
use crate::post::PostError;
use crate::solver::{Monitor, SolverError};
use crate::spline::{insert_knots, NurbsPatch, SplineError, KNOT_TOL};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CaseError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
}

impl CaseError {
    /// Machine-readable category reported by the command-line driver.
    pub fn category(&self) -> &'static str {
        match self {
            CaseError::Config(_) => "config",
            CaseError::Geometry(_) => "geometry",
            CaseError::NonConvergence(_) => "nonconvergence",
            CaseError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CaseError::Config(_) => 2,
            CaseError::Geometry(_) => 3,
            CaseError::NonConvergence(_) => 4,
            CaseError::Io { .. } => 5,
        }
    }

    pub(crate) fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CaseError::Io { path: path.display().to_string(), message: e.to_string() }
    }
}

impl From<SplineError> for CaseError {
    fn from(e: SplineError) -> Self {
        CaseError::Geometry(e.to_string())
    }
}

impl From<MeshError> for CaseError {
    fn from(e: MeshError) -> Self {
        CaseError::Geometry(e.to_string())
    }
}

impl From<FemError> for CaseError {
    fn from(e: FemError) -> Self {
        match e {
            FemError::DistortedElement { .. } | FemError::DegenerateInterface { .. } | FemError::Mesh(_) => {
                CaseError::Geometry(e.to_string())
            }
            _ => CaseError::Config(e.to_string()),
        }
    }
}

impl From<SolverError> for CaseError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Config(m) => CaseError::Config(m),
            SolverError::Io { path, message } => CaseError::Io { path, message },
            SolverError::Fem(f) => f.into(),
            other => CaseError::NonConvergence(other.to_string()),
        }
    }
}

impl From<PostError> for CaseError {
    fn from(e: PostError) -> Self {
        match e {
            PostError::Io { path, message } => CaseError::Io { path, message },
            other => CaseError::Config(other.to_string()),
        }
    }
}

/// A benchmark discretization before materials are attached.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub mesh: IgaMesh,
    pub interfaces: InterfaceMesh,
    pub dofs: DofMap,
    pub loads: LoadSpec,
    pub monitors: Vec<Monitor>,
    /// Out-of-plane width of 2D models (mm).
    pub thickness: f64,
    /// Parametric direction along the fibres of 0-degree plies.
    pub frame_dir: Option<usize>,
    /// Stacking direction and parametric ply boundaries (`plies + 1` values).
    pub layer_dir: usize,
    pub layer_bounds: Vec<f64>,
}

impl Benchmark {
    pub fn regime(&self) -> crate::material::Regime {
        if self.mesh.param_dim() == 3 {
            crate::material::Regime::ThreeD
        } else {
            crate::material::Regime::PlaneStrain
        }
    }

    pub fn plies(&self) -> usize {
        self.layer_bounds.len().saturating_sub(1)
    }

    /// Assigns ply angles (degrees) and material indices, one per ply.
    pub fn apply_layup(&mut self, angles: &[f64], materials: &[usize]) -> Result<(), CaseError> {
        let n = self.plies();
        if angles.len() != n || materials.len() != n {
            return Err(CaseError::Config(format!(
                "layup lists {} angles and {} materials for {n} plies",
                angles.len(),
                materials.len()
            )));
        }
        self.mesh.assign_layers(self.layer_dir, &self.layer_bounds, angles, materials);
        Ok(())
    }

    /// Number of distinct interface groups.
    pub fn interface_groups(&self) -> usize {
        self.interfaces.elements.iter().map(|e| e.group + 1).max().unwrap_or(0)
    }

    /// Attaches ply materials and one cohesive parameter set (used for every
    /// interface group).
    pub fn into_model(
        self,
        plies: Vec<PlyElasticity>,
        cohesive: CohesiveParams,
        contact: ContactParams,
    ) -> Result<Model, CaseError> {
        let regime = self.regime();
        let groups = self.interface_groups().max(1);
        Ok(Model::new(ModelSpec {
            regime,
            thickness: self.thickness,
            plies,
            cohesive: vec![cohesive; groups],
            contact,
            dofs: self.dofs,
            loads: self.loads,
            frame_dir: self.frame_dir,
            basis: crate::fem::BasisPath::Extraction,
            mesh: self.mesh,
            interfaces: self.interfaces,
        })?)
    }
}

/// h-refinement to `total` spans along `dir`, distributed over the existing
/// non-zero spans in proportion to their parametric length (at least one
/// new span each); new knots split each span uniformly.
pub fn refine_spans(patch: &NurbsPatch, dir: usize, total: usize) -> Result<NurbsPatch, CaseError> {
    let u = patch.knot(dir).unique();
    let lens: Vec<f64> = u.windows(2).map(|w| w[1] - w[0]).collect();
    let n = lens.len();
    if total < n {
        return Err(CaseError::Config(format!(
            "{total} elements requested along direction {dir}, but the geometry already has {n} spans"
        )));
    }
    let span = u[n] - u[0];
    let ideal: Vec<f64> = lens.iter().map(|l| total as f64 * l / span).collect();
    let mut parts: Vec<usize> = ideal.iter().map(|x| (x.floor() as usize).max(1)).collect();
    // largest remainders first; ties resolved by position for determinism
    while parts.iter().sum::<usize>() < total {
        let k = (0..n)
            .max_by(|&a, &b| {
                let ra = ideal[a] - parts[a] as f64;
                let rb = ideal[b] - parts[b] as f64;
                ra.partial_cmp(&rb).expect("finite").then(b.cmp(&a))
            })
            .expect("at least one span");
        parts[k] += 1;
    }
    while parts.iter().sum::<usize>() > total {
        let k = (0..n)
            .filter(|&k| parts[k] > 1)
            .min_by(|&a, &b| {
                let ra = ideal[a] - parts[a] as f64;
                let rb = ideal[b] - parts[b] as f64;
                ra.partial_cmp(&rb).expect("finite").then(a.cmp(&b))
            })
            .expect("reducible span");
        parts[k] -= 1;
    }
    let mut knots = Vec::new();
    for (w, &m) in u.windows(2).zip(&parts) {
        for k in 1..m {
            knots.push(w[0] + (w[1] - w[0]) * k as f64 / m as f64);
        }
    }
    Ok(insert_knots(patch, dir, &knots)?)
}

/// Control points on the boundary `param[dir] = first (upper = false) or last knot`.
pub fn boundary_points(patch: &NurbsPatch, dir: usize, upper: bool) -> Vec<usize> {
    let counts = patch.counts();
    let target = if upper { counts[dir] - 1 } else { 0 };
    (0..patch.num_points()).filter(|&i| patch.tensor_index(i)[dir] == target).collect()
}

/// Whether `x` is (within knot tolerance) a knot of direction `dir`.
pub(crate) fn has_knot(patch: &NurbsPatch, dir: usize, x: f64) -> bool {
    patch.knot(dir).values().iter().any(|&k| (k - x).abs() <= KNOT_TOL)
}
