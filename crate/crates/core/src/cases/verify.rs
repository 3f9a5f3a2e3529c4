use serde::Serialize;

use super::{
    oracle_dcb, oracle_mmb, CaseConfig, CaseError, DcbOracleParams, GeometryConfig, MmbOracle, MmbOracleParams,
    OracleCurve, PlyConfig,
};
use crate::solver::{SolverTrace, TraceRow};

/// Displacement reversals smaller than this fraction of the displacement at
/// their start are treated as increment noise, not snap-backs.
pub const SNAP_BACK_TOLERANCE: f64 = 0.01;

/// One compared quantity; `tolerance` is relative and `None` marks an
/// informational row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub model: f64,
    pub reference: f64,
    pub error: f64,
    pub tolerance: Option<f64>,
    pub passed: bool,
}

impl Check {
    fn relative(name: &str, model: f64, reference: f64, tolerance: Option<f64>) -> Self {
        let error = (model - reference) / reference;
        let passed = tolerance.is_none_or(|t| error.abs() <= t);
        Self { name: name.into(), model, reference, error, tolerance, passed }
    }

    fn exact(name: &str, model: f64, reference: f64) -> Self {
        Self { name: name.into(), model, reference, error: model - reference, tolerance: Some(0.0), passed: model == reference }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub case: String,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Fixed-width text table, one row per check.
    pub fn to_table(&self) -> String {
        let mut s = format!(
            "{:<34} {:>14} {:>14} {:>10} {:>9}  {}\n",
            "quantity", "model", "reference", "error %", "tol %", "result"
        );
        for c in &self.checks {
            let tol = c.tolerance.map_or("-".to_string(), |t| format!("{:.2}", 100.0 * t));
            let verdict = match (c.tolerance, c.passed) {
                (None, _) => "info",
                (_, true) => "pass",
                (_, false) => "FAIL",
            };
            s.push_str(&format!(
                "{:<34} {:>14.6} {:>14.6} {:>10.3} {:>9}  {verdict}\n",
                c.name,
                c.model,
                c.reference,
                100.0 * c.error,
                tol
            ));
        }
        for n in &self.notes {
            s.push_str(&format!("note: {n}\n"));
        }
        s
    }
}

/// Stretches `(start, end)` of row indices over which the displacement
/// falls by more than `rel` times its value at `start`.
pub fn snap_backs(rows: &[TraceRow], rel: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 1;
    while i < rows.len() {
        if rows[i].displacement < rows[i - 1].displacement {
            let start = i - 1;
            while i < rows.len() && rows[i].displacement <= rows[i - 1].displacement {
                i += 1;
            }
            let end = i - 1;
            let v0 = rows[start].displacement;
            if v0 - rows[end].displacement > rel * v0.abs() {
                out.push((start, end));
            }
        } else {
            i += 1;
        }
    }
    out
}

/// Linear interpolation of `y(x)` on samples with increasing `x`.
fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> Option<f64> {
    let k = xs.windows(2).position(|w| x >= w[0] && x <= w[1])?;
    let t = if xs[k + 1] > xs[k] { (x - xs[k]) / (xs[k + 1] - xs[k]) } else { 0.0 };
    Some(ys[k] + t * (ys[k + 1] - ys[k]))
}

/// Rising-displacement part of a response after its last turning point:
/// from the smallest displacement reached after the peak load onwards,
/// keeping only rows that advance the displacement.
fn recovered_branch(points: &[(f64, f64)]) -> (Vec<f64>, Vec<f64>) {
    let Some(peak) = (0..points.len()).max_by(|&a, &b| points[a].1.total_cmp(&points[b].1)) else {
        return (vec![], vec![]);
    };
    let start = (peak..points.len())
        .min_by(|&a, &b| points[a].0.total_cmp(&points[b].0).then(b.cmp(&a)))
        .unwrap_or(peak);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &(v, p) in &points[start..] {
        if xs.last().is_none_or(|&l| v > l) {
            xs.push(v);
            ys.push(p);
        }
    }
    (xs, ys)
}

fn isotropic_modulus(cfg: &CaseConfig) -> Result<f64, CaseError> {
    let (_, mats) = cfg.layup_lists();
    let e = mats
        .iter()
        .map(|&m| match cfg.materials.plies[m] {
            PlyConfig::Isotropic { e_mpa, .. } => Ok(e_mpa),
            PlyConfig::Orthotropic { .. } => {
                Err(CaseError::Config("the beam-theory reference needs isotropic plies".into()))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    if e.windows(2).any(|w| w[0] != w[1]) {
        return Err(CaseError::Config("the beam-theory reference needs both arms of one material".into()));
    }
    Ok(e[0])
}

pub fn dcb_oracle_params(cfg: &CaseConfig) -> Result<DcbOracleParams, CaseError> {
    let GeometryConfig::Dcb3d(g) = &cfg.geometry else {
        return Err(CaseError::Config(format!("'{}' is not a DCB case", cfg.case.name)));
    };
    Ok(DcbOracleParams {
        length: g.length_mm,
        width: g.width_mm,
        arm_thickness: 0.5 * g.thickness_mm,
        crack_length: g.crack_length_mm,
        modulus: isotropic_modulus(cfg)?,
        g_ic: cfg.materials.cohesive.g_ic_n_per_mm,
        max_opening: cfg.solver.max_load_factor.unwrap_or(10.0),
    })
}

pub fn mmb_oracle_params(cfg: &CaseConfig) -> Result<MmbOracleParams, CaseError> {
    let GeometryConfig::Mmb(g) = &cfg.geometry else {
        return Err(CaseError::Config(format!("'{}' is not an MMB case", cfg.case.name)));
    };
    let c = &cfg.materials.cohesive;
    Ok(MmbOracleParams {
        length: g.length_mm,
        width: g.width_mm,
        arm_thickness: g.arm_thickness_mm,
        crack_length: g.crack_length_mm,
        lever: g.lever_mm,
        modulus: isotropic_modulus(cfg)?,
        g_ic: c.g_ic_n_per_mm,
        g_iic: c.g_iic_n_per_mm,
        eta: c.eta,
    })
}

/// Elastic stiffness of a trace: load over displacement at the first
/// increment.
pub fn initial_stiffness(trace: &SolverTrace) -> Option<f64> {
    trace.rows.iter().find(|r| r.displacement != 0.0).map(|r| r.load / r.displacement)
}

/// DCB: peak load and elastic stiffness against beam theory. `tol`
/// overrides the peak tolerance (10 %); the stiffness tolerance is 5 %.
pub fn compare_dcb(cfg: &CaseConfig, trace: &SolverTrace, tol: Option<f64>) -> Result<(VerifyReport, OracleCurve), CaseError> {
    let oracle = oracle_dcb(&dcb_oracle_params(cfg)?);
    let stiffness = initial_stiffness(trace).ok_or_else(|| CaseError::Config("trace has no loaded increment".into()))?;
    let checks = vec![
        Check::relative("peak load (N)", trace.peak_load(), oracle.peak_load(), Some(tol.unwrap_or(0.10))),
        Check::relative("elastic stiffness (N/mm)", stiffness, oracle.elastic_stiffness(), Some(0.05)),
    ];
    let report = VerifyReport { case: cfg.case.name.clone(), checks, notes: vec![] };
    Ok((report, oracle))
}

/// Post-peak comparison at equal displacement: the model's recovered branch
/// (after its snap-back) is interpolated at the oracle's rising propagation
/// samples it covers. Returns `(displacement, model, oracle)` triples.
pub fn mmb_post_peak(trace: &SolverTrace, oracle: &MmbOracle) -> Vec<(f64, f64, f64)> {
    let model: Vec<(f64, f64)> = trace.rows.iter().map(|r| (r.displacement, r.load)).collect();
    let (mx, my) = recovered_branch(&model);
    let prop: Vec<(f64, f64)> = oracle.curve.propagation().map(|p| (p.displacement, p.load)).collect();
    let turn = (0..prop.len()).min_by(|&a, &b| prop[a].0.total_cmp(&prop[b].0)).unwrap_or(0);
    prop[turn..]
        .iter()
        .filter_map(|&(v, p)| interpolate(&mx, &my, v).map(|m| (v, m, p)))
        .collect()
}

/// MMB: oracle mode ratio, a single snap-back in the solved response, and
/// the post-peak load at equal displacement. `tol` overrides the post-peak
/// tolerance (10 %).
pub fn compare_mmb(cfg: &CaseConfig, trace: &SolverTrace, tol: Option<f64>) -> Result<(VerifyReport, OracleCurve), CaseError> {
    let oracle = oracle_mmb(&mmb_oracle_params(cfg)?);
    let mut checks = vec![
        Check::relative("mode ratio G_I/G_II (oracle)", oracle.mode_ratio, 1.0, Some(0.01)),
        Check::exact("snap-backs", snap_backs(&trace.rows, SNAP_BACK_TOLERANCE).len() as f64, 1.0),
        Check::relative("peak load (N)", trace.peak_load(), oracle.curve.peak_load(), None),
    ];
    let mut notes = Vec::new();
    let post = mmb_post_peak(trace, &oracle);
    match post.iter().max_by(|a, b| ((a.1 - a.2) / a.2).abs().total_cmp(&((b.1 - b.2) / b.2).abs())) {
        Some(&(v, m, o)) => {
            checks.push(Check::relative("worst post-peak load (N)", m, o, Some(tol.unwrap_or(0.10))));
            notes.push(format!("post-peak compared at {} oracle points; worst at displacement {v:.4} mm", post.len()));
        }
        None => {
            checks.push(Check { name: "worst post-peak load (N)".into(), model: f64::NAN, reference: f64::NAN, error: f64::NAN, tolerance: tol.or(Some(0.10)), passed: false });
            notes.push("the solved response does not reach the propagation range".into());
        }
    }
    let report = VerifyReport { case: cfg.case.name.clone(), checks, notes };
    Ok((report, oracle.curve))
}

/// Runs the applicable oracle comparison for a solved case.
pub fn verify_trace(cfg: &CaseConfig, trace: &SolverTrace, tol: Option<f64>) -> Result<(VerifyReport, OracleCurve), CaseError> {
    match cfg.geometry {
        GeometryConfig::Dcb3d(_) => compare_dcb(cfg, trace, tol),
        GeometryConfig::Mmb(_) => compare_mmb(cfg, trace, tol),
        _ => Err(CaseError::Config(format!(
            "no analytic reference for geometry kind '{}'; verify supports mmb and dcb3d",
            cfg.geometry.kind()
        ))),
    }
}
