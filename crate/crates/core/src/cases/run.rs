use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{
    build_curved_laminate, build_dcb3d, build_lshape, build_mmb, Benchmark, CaseConfig, CaseError, FieldOutput,
    GeometryConfig, OffsetReport,
};
use crate::fem::Model;
use crate::material::ContactParams;
use crate::mesh::io::{write_mesh, MeshDocument};
use crate::mesh::bezier_extraction;
use crate::post::{build_vis_mesh, continuum_document, field_file_name, interface_document};
use crate::solver::{run_analysis, Monitor, SolverError, SolverState, SolverTrace, TraceRow, TraceWriter};

/// Discretization and model of a configured case.
#[derive(Debug, Clone)]
pub struct BuiltCase {
    pub model: Model,
    pub monitors: Vec<Monitor>,
    pub offset: Option<OffsetReport>,
}

fn array<const N: usize>(v: &[usize]) -> [usize; N] {
    v.try_into().expect("arity checked by CaseConfig::validate")
}

/// Builds the benchmark geometry, interfaces and boundary conditions.
pub fn build_benchmark(cfg: &CaseConfig) -> Result<(Benchmark, Option<OffsetReport>), CaseError> {
    let (deg, el) = (&cfg.mesh.degrees, &cfg.mesh.elements);
    let mut bench = match &cfg.geometry {
        GeometryConfig::Mmb(p) => (build_mmb(p, array(deg), array(el))?, None),
        GeometryConfig::Dcb3d(p) => (build_dcb3d(p, array(deg), array(el))?, None),
        GeometryConfig::Lshape(p) => (build_lshape(p, array(deg), array(el))?, None),
        GeometryConfig::Curved(p) => {
            let (b, r) = build_curved_laminate(p, array(deg), array(el))?;
            (b, Some(r))
        }
    };
    let (angles, mats) = cfg.layup_lists();
    bench.0.apply_layup(&angles, &mats)?;
    Ok(bench)
}

pub fn build_model(cfg: &CaseConfig) -> Result<BuiltCase, CaseError> {
    let (bench, offset) = build_benchmark(cfg)?;
    let monitors = bench.monitors.clone();
    let plies = cfg.materials.plies.iter().map(|p| p.elasticity()).collect();
    let contact = ContactParams { penalty: cfg.materials.contact.penalty_n_per_mm3 };
    let model = bench.into_model(plies, cfg.materials.cohesive.params(), contact)?;
    Ok(BuiltCase { model, monitors, offset })
}

/// The five-block mesh export of a case (no solve).
pub fn mesh_document(cfg: &CaseConfig) -> Result<String, CaseError> {
    let (bench, _) = build_benchmark(cfg)?;
    let ext = bezier_extraction(&bench.mesh);
    Ok(write_mesh(&MeshDocument::new(bench.mesh, bench.interfaces, &ext)))
}

/// Overrides applied on top of a configuration.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub steps: Option<usize>,
    pub write_fields: Option<FieldOutput>,
    /// Recorded in the manifest only.
    pub seed: Option<u64>,
}

/// Record of a run, also written as JSON next to the trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub case: String,
    pub geometry: String,
    pub config_sha256: String,
    pub version: String,
    pub status: String,
    #[serde(default)]
    pub error: Option<String>,
    pub wall_time_s: f64,
    pub dofs: usize,
    pub elements: usize,
    pub interface_elements: usize,
    pub increments: usize,
    pub peak_load_n: f64,
    pub final_dissipated_nmm: f64,
    #[serde(default)]
    pub offset: Option<OffsetReport>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub warnings: Vec<String>,
    pub files: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CaseRun {
    pub trace: SolverTrace,
    pub state: SolverState,
    pub manifest: Manifest,
    pub trace_path: PathBuf,
    pub manifest_path: PathBuf,
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn write_fields(
    model: &Model,
    vis: &crate::post::VisMesh,
    state: &SolverState,
    dir: &Path,
    prefix: &str,
    step: usize,
) -> Result<Vec<String>, CaseError> {
    let mut files = Vec::new();
    let cont = field_file_name(prefix, step);
    continuum_document(model, vis, &state.u, &format!("{prefix} step {step}")).write(&dir.join(&cont))?;
    files.push(cont);
    if !model.spec.interfaces.elements.is_empty() {
        let name = field_file_name(&format!("{prefix}_interface"), step);
        interface_document(model, &state.u, &state.states, &format!("{prefix} interface step {step}"))
            .write(&dir.join(&name))?;
        files.push(name);
    }
    Ok(files)
}

/// Builds and solves a case, streaming the trace to `out_dir` and writing
/// the requested fields and a run manifest. `config_text` is hashed into the
/// manifest. A solver failure still leaves the partial trace and a manifest
/// with status `failed` behind.
pub fn run_case(cfg: &CaseConfig, config_text: &str, opts: &RunOptions) -> Result<CaseRun, CaseError> {
    let t0 = Instant::now();
    let built = build_model(cfg)?;
    let model = &built.model;
    let dir = &opts.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| CaseError::io(dir, e))?;
    let out = &cfg.output;
    let fields = opts.write_fields.unwrap_or(out.write_fields);
    let mut control = cfg.solver.clone();
    if let Some(n) = opts.steps {
        control.max_steps = n;
    }
    let trace_path = dir.join(&out.trace_file);
    let names: Vec<String> = built.monitors.iter().map(|m| m.name.clone()).collect();
    let mut writer = TraceWriter::create(&trace_path, &names)?;
    let vis = (fields != FieldOutput::None).then(|| build_vis_mesh(&model.spec.mesh, 2));
    let mut files = vec![out.trace_file.clone()];

    let result = run_analysis(model, &control, &cfg.convergence, &built.monitors, |row: &TraceRow, st| {
        writer.append(row)?;
        if let (FieldOutput::All, Some(vis)) = (fields, &vis) {
            let written = write_fields(model, vis, st, dir, &out.field_prefix, row.step)
                .map_err(|e| SolverError::Io { path: dir.display().to_string(), message: e.to_string() })?;
            files.extend(written);
        }
        Ok(())
    });
    drop(writer);

    let mut warnings = cfg.materials.cohesive.params().warnings();
    if let Some(r) = &built.offset {
        warnings.push(format!("offset surface approximated; largest deviation {:.3e} mm", r.max_error_mm));
    }
    let mut manifest = Manifest {
        case: cfg.case.name.clone(),
        geometry: cfg.geometry.kind().to_string(),
        config_sha256: sha256_hex(config_text),
        version: env!("CARGO_PKG_VERSION").to_string(),
        status: "completed".into(),
        error: None,
        wall_time_s: 0.0,
        dofs: model.ndofs(),
        elements: model.spec.mesh.elements.len(),
        interface_elements: model.spec.interfaces.elements.len(),
        increments: 0,
        peak_load_n: f64::NAN,
        final_dissipated_nmm: 0.0,
        offset: built.offset,
        seed: opts.seed,
        warnings,
        files,
    };
    let manifest_path = dir.join(&out.manifest_file);
    let outcome = match result {
        Ok((trace, state)) => {
            if let (FieldOutput::Final, Some(vis)) = (fields, &vis) {
                let last = trace.rows.last().map_or(0, |r| r.step);
                manifest.files.extend(write_fields(model, vis, &state, dir, &out.field_prefix, last)?);
            }
            Ok((trace, state))
        }
        Err(f) => {
            manifest.status = "failed".into();
            manifest.error = Some(f.to_string());
            Err((f.trace, f.error))
        }
    };
    let trace = match &outcome {
        Ok((t, _)) | Err((t, _)) => t,
    };
    manifest.increments = trace.rows.len().saturating_sub(1);
    manifest.peak_load_n = trace.peak_load();
    manifest.final_dissipated_nmm = trace.rows.last().map_or(0.0, |r| r.dissipated);
    manifest.files.push(out.manifest_file.clone());
    manifest.wall_time_s = t0.elapsed().as_secs_f64();
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| CaseError::Config(e.to_string()))?;
    std::fs::write(&manifest_path, json + "\n").map_err(|e| CaseError::io(&manifest_path, e))?;
    match outcome {
        Ok((trace, state)) => Ok(CaseRun { trace, state, manifest, trace_path, manifest_path }),
        Err((_, e)) => Err(e.into()),
    }
}
