use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::continuum::continuum_geometry;
use super::dofs::DofMap;
use super::quadrature::QuadratureRule;
use super::FemError;
use crate::mesh::IgaMesh;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointLoad {
    pub point: usize,
    pub comp: usize,
    /// N
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaceSide {
    Lower,
    Upper,
}

/// Uniform traction (MPa) on the boundary face `param[dir] = first/last
/// knot`, optionally restricted to parametric ranges on the face
/// directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceTraction {
    pub dir: usize,
    pub side: FaceSide,
    pub traction: [f64; 3],
    #[serde(default)]
    pub range: Vec<[f64; 2]>,
}

/// Unit load pattern, scaled by the load factor.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LoadSpec {
    #[serde(default)]
    pub point_loads: Vec<PointLoad>,
    #[serde(default)]
    pub tractions: Vec<FaceTraction>,
    /// N/mm^3
    #[serde(default)]
    pub body: Option<[f64; 3]>,
}

/// Assembles the external force pattern `f_hat` over all unknowns.
pub fn external_force(loads: &LoadSpec, mesh: &IgaMesh, dofs: &DofMap, thickness: f64) -> Result<Vec<f64>, FemError> {
    let nc = dofs.ncomp;
    let mut f = vec![0.0; dofs.len()];
    for pl in &loads.point_loads {
        if pl.point >= dofs.npoints || pl.comp >= nc {
            return Err(FemError::Config(format!("point load on nonexistent unknown ({}, {})", pl.point, pl.comp)));
        }
        f[dofs.dof(pl.point, pl.comp)] += pl.value;
    }
    for tr in &loads.tractions {
        face_traction(tr, mesh, nc, thickness, &mut f)?;
    }
    if let Some(b) = loads.body {
        for e in &mesh.elements {
            let geom = continuum_geometry(mesh, e, None, thickness, None)?;
            for gp in &geom.gps {
                for (a, &g) in e.conn.iter().enumerate() {
                    for c in 0..nc {
                        f[g * nc + c] += gp.n[a] * b[c] * gp.dv;
                    }
                }
            }
        }
    }
    Ok(f)
}

fn face_traction(tr: &FaceTraction, mesh: &IgaMesh, nc: usize, thickness: f64, f: &mut [f64]) -> Result<(), FemError> {
    let patch = &mesh.patch;
    let dim = patch.param_dim();
    if tr.dir >= dim {
        return Err(FemError::Config(format!("traction on nonexistent face direction {}", tr.dir)));
    }
    let face_dirs: Vec<usize> = (0..dim).filter(|&d| d != tr.dir).collect();
    if !tr.range.is_empty() && tr.range.len() != face_dirs.len() {
        return Err(FemError::Config("traction range needs one interval per face direction".into()));
    }
    let kv = patch.knot(tr.dir);
    let fixed = match tr.side {
        FaceSide::Lower => kv.first(),
        FaceSide::Upper => kv.last(),
    };
    let counts: Vec<usize> = face_dirs.iter().map(|&d| patch.knot(d).degree() + 2).collect();
    let rule = QuadratureRule::tensor(&counts);
    let pts = patch.points();
    for e in &mesh.elements {
        if (e.bounds[tr.dir][0] - fixed).abs() > 0.0 && (e.bounds[tr.dir][1] - fixed).abs() > 0.0 {
            continue;
        }
        // face box intersected with the requested range
        let mut bx = Vec::with_capacity(face_dirs.len());
        for (k, &d) in face_dirs.iter().enumerate() {
            let (mut lo, mut hi) = (e.bounds[d][0], e.bounds[d][1]);
            if let Some(r) = tr.range.get(k) {
                lo = lo.max(r[0]);
                hi = hi.min(r[1]);
            }
            bx.push([lo, hi]);
        }
        if bx.iter().any(|b| b[1] <= b[0]) {
            continue;
        }
        let scale: f64 = bx.iter().map(|b| 0.5 * (b[1] - b[0])).product();
        for (t, w) in rule.points.iter().zip(&rule.weights) {
            let mut param = vec![0.0; dim];
            param[tr.dir] = fixed;
            for (k, &d) in face_dirs.iter().enumerate() {
                param[d] = bx[k][0] + 0.5 * (t[k] + 1.0) * (bx[k][1] - bx[k][0]);
            }
            let rb = patch.rational_basis_on_spans(&param, &e.spans, 1);
            let mut a = [Vector3::zeros(), Vector3::zeros()];
            for (idx, &g) in e.conn.iter().enumerate() {
                let x = Vector3::from(pts[g]);
                for (k, &d) in face_dirs.iter().enumerate() {
                    a[k] += x * rb.derivs[idx][d];
                }
            }
            let measure = if face_dirs.len() == 1 { a[0].norm() * thickness } else { a[0].cross(&a[1]).norm() };
            for (idx, &g) in e.conn.iter().enumerate() {
                for c in 0..nc {
                    f[g * nc + c] += rb.values[idx] * tr.traction[c] * measure * w * scale;
                }
            }
        }
    }
    Ok(())
}
