use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CaseError, CurvedLaminateParams, DcbParams, LShapeParams, MmbParams};
use crate::material::{CohesiveParams, ContactParams, PlyElasticity};
use crate::solver::{ConvergenceSettings, StepControl};

/// A complete, validated analysis case (TOML document; lengths in mm,
/// forces in N, moduli and strengths in MPa, toughness in N/mm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub case: CaseInfo,
    pub geometry: GeometryConfig,
    pub mesh: MeshConfig,
    pub materials: MaterialsConfig,
    #[serde(default)]
    pub layup: Option<LayupConfig>,
    #[serde(default)]
    pub solver: StepControl,
    #[serde(default)]
    pub convergence: ConvergenceSettings,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseInfo {
    pub name: String,
    #[serde(default)]
    pub description: String,
}

/// Benchmark geometry selected by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeometryConfig {
    Mmb(MmbParams),
    Dcb3d(DcbParams),
    Lshape(LShapeParams),
    Curved(CurvedLaminateParams),
}

impl GeometryConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            GeometryConfig::Mmb(_) => "mmb",
            GeometryConfig::Dcb3d(_) => "dcb3d",
            GeometryConfig::Lshape(_) => "lshape",
            GeometryConfig::Curved(_) => "curved",
        }
    }

    /// Number of `mesh.degrees` and `mesh.elements` entries expected.
    fn mesh_arity(&self) -> (usize, usize) {
        match self {
            GeometryConfig::Mmb(_) | GeometryConfig::Lshape(_) => (2, 2),
            GeometryConfig::Dcb3d(_) => (3, 3),
            GeometryConfig::Curved(_) => (2, 3),
        }
    }

    /// Number of plies the geometry stacks.
    pub fn plies(&self) -> usize {
        match self {
            GeometryConfig::Mmb(_) | GeometryConfig::Dcb3d(_) => 2,
            GeometryConfig::Lshape(p) => p.plies,
            GeometryConfig::Curved(p) => p.plies,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub degrees: Vec<usize>,
    pub elements: Vec<usize>,
}

/// Ply elasticity, either isotropic or transversely isotropic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlyConfig {
    Isotropic {
        e_mpa: f64,
        nu: f64,
    },
    Orthotropic {
        e11_mpa: f64,
        e22_mpa: f64,
        g12_mpa: f64,
        nu12: f64,
        nu23: f64,
    },
}

impl PlyConfig {
    pub fn elasticity(&self) -> PlyElasticity {
        match *self {
            PlyConfig::Isotropic { e_mpa, nu } => PlyElasticity::isotropic(e_mpa, nu),
            PlyConfig::Orthotropic { e11_mpa, e22_mpa, g12_mpa, nu12, nu23 } => {
                PlyElasticity { e11: e11_mpa, e22: e22_mpa, g12: g12_mpa, nu12, nu23, density: 0.0 }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohesiveConfig {
    pub stiffness_n_per_mm3: f64,
    pub tau_n_mpa: f64,
    pub tau_s_mpa: f64,
    pub g_ic_n_per_mm: f64,
    pub g_iic_n_per_mm: f64,
    pub eta: f64,
}

impl CohesiveConfig {
    pub fn params(&self) -> CohesiveParams {
        CohesiveParams {
            stiffness: self.stiffness_n_per_mm3,
            tau_n: self.tau_n_mpa,
            tau_s: self.tau_s_mpa,
            g_ic: self.g_ic_n_per_mm,
            g_iic: self.g_iic_n_per_mm,
            eta: self.eta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactConfig {
    pub penalty_n_per_mm3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialsConfig {
    pub plies: Vec<PlyConfig>,
    pub cohesive: CohesiveConfig,
    pub contact: ContactConfig,
}

/// Ply angles (degrees, 0 along the section/length direction) and material
/// indices, listed from the bottom/inner ply; `materials` defaults to all 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayupConfig {
    pub angles_deg: Vec<f64>,
    #[serde(default)]
    pub materials: Vec<usize>,
}

/// Which solution fields are written as VTK files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FieldOutput {
    #[default]
    None,
    Final,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub trace_file: String,
    pub manifest_file: String,
    pub mesh_file: String,
    pub field_prefix: String,
    pub write_fields: FieldOutput,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            trace_file: "trace.csv".into(),
            manifest_file: "manifest.json".into(),
            mesh_file: "mesh.txt".into(),
            field_prefix: "fields".into(),
            write_fields: FieldOutput::None,
        }
    }
}

impl CaseConfig {
    /// Parses and validates a TOML case document.
    pub fn from_toml_str(text: &str) -> Result<Self, CaseError> {
        let cfg: CaseConfig = toml::from_str(text).map_err(|e| CaseError::Config(e.to_string().trim_end().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, String), CaseError> {
        let text = std::fs::read_to_string(path).map_err(|e| CaseError::io(path, e))?;
        let cfg = Self::from_toml_str(&text).map_err(|e| match e {
            CaseError::Config(m) => CaseError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        Ok((cfg, text))
    }

    pub fn to_toml_string(&self) -> Result<String, CaseError> {
        toml::to_string(self).map_err(|e| CaseError::Config(e.to_string()))
    }

    /// Ply angles and material indices, one per ply.
    pub fn layup_lists(&self) -> (Vec<f64>, Vec<usize>) {
        let n = self.geometry.plies();
        match &self.layup {
            Some(l) => {
                let mats = if l.materials.is_empty() { vec![0; l.angles_deg.len()] } else { l.materials.clone() };
                (l.angles_deg.clone(), mats)
            }
            None => (vec![0.0; n], vec![0; n]),
        }
    }

    /// Checks everything that can be checked without building the mesh.
    pub fn validate(&self) -> Result<(), CaseError> {
        if self.case.name.trim().is_empty() {
            return Err(CaseError::Config("case.name must not be empty".into()));
        }
        match &self.geometry {
            GeometryConfig::Mmb(p) => p.validate()?,
            GeometryConfig::Dcb3d(p) => p.validate()?,
            GeometryConfig::Lshape(p) => p.validate()?,
            GeometryConfig::Curved(p) => p.validate()?,
        }
        let (nd, ne) = self.geometry.mesh_arity();
        if self.mesh.degrees.len() != nd || self.mesh.elements.len() != ne {
            return Err(CaseError::Config(format!(
                "geometry kind '{}' needs {nd} mesh.degrees and {ne} mesh.elements, got {} and {}",
                self.geometry.kind(),
                self.mesh.degrees.len(),
                self.mesh.elements.len()
            )));
        }
        if self.mesh.degrees.iter().any(|&p| p == 0 || p > 8) {
            return Err(CaseError::Config(format!("mesh.degrees {:?} must lie in 1..=8", self.mesh.degrees)));
        }
        if self.mesh.elements.iter().any(|&n| n == 0) {
            return Err(CaseError::Config("mesh.elements must be positive".into()));
        }
        if self.materials.plies.is_empty() {
            return Err(CaseError::Config("materials.plies must list at least one ply material".into()));
        }
        for (k, ply) in self.materials.plies.iter().enumerate() {
            ply.elasticity()
                .material_stiffness()
                .map_err(|e| CaseError::Config(format!("materials.plies[{k}]: {e}")))?;
        }
        self.materials.cohesive.params().validate().map_err(|e| CaseError::Config(format!("materials.cohesive: {e}")))?;
        ContactParams { penalty: self.materials.contact.penalty_n_per_mm3 }
            .validate()
            .map_err(|e| CaseError::Config(format!("materials.contact: {e}")))?;
        let plies = self.geometry.plies();
        let (angles, mats) = self.layup_lists();
        if angles.len() != plies || mats.len() != plies {
            return Err(CaseError::Config(format!(
                "layup lists {} angles and {} materials, the geometry has {plies} plies",
                angles.len(),
                mats.len()
            )));
        }
        if let Some(m) = mats.iter().find(|&&m| m >= self.materials.plies.len()) {
            return Err(CaseError::Config(format!(
                "layup.materials refers to ply material {m}, only {} defined",
                self.materials.plies.len()
            )));
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(CaseError::Config("layup.angles_deg must be finite".into()));
        }
        self.solver.validate().map_err(|e| CaseError::Config(format!("solver: {e}")))?;
        self.convergence.validate().map_err(|e| CaseError::Config(format!("convergence: {e}")))?;
        let o = &self.output;
        for (name, v) in [
            ("trace_file", &o.trace_file),
            ("manifest_file", &o.manifest_file),
            ("mesh_file", &o.mesh_file),
            ("field_prefix", &o.field_prefix),
        ] {
            if v.trim().is_empty() || v.contains(['/', '\\']) {
                return Err(CaseError::Config(format!("output.{name} = {v:?} must be a plain file name")));
            }
        }
        Ok(())
    }
}

const BUILTIN: &[(&str, &str)] = &[
    ("mmb", include_str!("../../cases/mmb.toml")),
    ("mmb_fine", include_str!("../../cases/mmb_fine.toml")),
    ("dcb3d", include_str!("../../cases/dcb3d.toml")),
    ("lshape", include_str!("../../cases/lshape.toml")),
    ("lshape_small_crack", include_str!("../../cases/lshape_small_crack.toml")),
    ("lshape_large_crack", include_str!("../../cases/lshape_large_crack.toml")),
    ("lshape_multi", include_str!("../../cases/lshape_multi.toml")),
    ("curved2d", include_str!("../../cases/curved2d.toml")),
    ("curved3d", include_str!("../../cases/curved3d.toml")),
];

/// Shipped case names with their TOML text.
pub fn builtin_cases() -> &'static [(&'static str, &'static str)] {
    BUILTIN
}

/// Parses a shipped case by name.
pub fn builtin_case(name: &str) -> Result<(CaseConfig, &'static str), CaseError> {
    let (_, text) = BUILTIN.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        let names: Vec<&str> = BUILTIN.iter().map(|(n, _)| *n).collect();
        CaseError::Config(format!("unknown case '{name}'; shipped cases: {}", names.join(", ")))
    })?;
    Ok((CaseConfig::from_toml_str(text)?, text))
}
