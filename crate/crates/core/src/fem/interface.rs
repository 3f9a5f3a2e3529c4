use nalgebra::{DMatrix, Matrix3, Vector3};

use super::continuum::to_param;
use super::quadrature::QuadratureRule;
use super::FemError;
use crate::material::{cohesive_update, contact_update, CohesiveParams, CohesiveState, ContactParams};
use crate::mesh::{tensor_bernstein, IgaMesh, InterfaceElement};

/// Cached integration-point data of an interface element.
#[derive(Debug, Clone)]
pub struct InterfaceGp {
    /// Face basis, shared by both faces.
    pub n: Vec<f64>,
    /// Rows: unit tangent(s) and unit normal of the reference mid-surface,
    /// `(t1, t2, n)`; in 2D `t2` is the out-of-plane axis.
    pub frame: Matrix3<f64>,
    /// Surface measure times weight (times out-of-plane thickness in 2D).
    pub da: f64,
    pub x: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct InterfaceGeometry {
    pub gps: Vec<InterfaceGp>,
}

impl InterfaceGeometry {
    pub fn area(&self) -> f64 {
        self.gps.iter().map(|g| g.da).sum()
    }
}

fn face_basis_extracted(mesh: &IgaMesh, ie: &InterfaceElement, op: &DMatrix<f64>, t: &[f64]) -> (Vec<f64>, Vec<[f64; 2]>) {
    let degs: Vec<usize> = ie.face_dirs.iter().map(|&d| mesh.patch.knot(d).degree()).collect();
    let (bv, bd) = tensor_bernstein(&degs, t);
    let jac: Vec<f64> = ie.bounds.iter().map(|b| 2.0 / (b[1] - b[0])).collect();
    let lower = ie.lower();
    let n = lower.len();
    let mut nw = vec![0.0; n];
    let mut dnw = vec![[0.0; 2]; n];
    for a in 0..n {
        let w = mesh.patch.weights()[lower[a]];
        for b in 0..op.ncols() {
            let c = op[(a, b)];
            nw[a] += c * bv[b] * w;
            for k in 0..degs.len() {
                dnw[a][k] += c * bd[b][k] * w * jac[k];
            }
        }
    }
    let ws: f64 = nw.iter().sum();
    let dws = dnw.iter().fold([0.0; 2], |s, d| [s[0] + d[0], s[1] + d[1]]);
    let vals: Vec<f64> = nw.iter().map(|v| v / ws).collect();
    let ders = (0..n).map(|a| [(dnw[a][0] - vals[a] * dws[0]) / ws, (dnw[a][1] - vals[a] * dws[1]) / ws]).collect();
    (vals, ders)
}

/// Integration-point data on the reference mid-surface of `ie`, using
/// `(p+1)` Gauss points per face direction.
pub fn interface_geometry(
    mesh: &IgaMesh,
    ie: &InterfaceElement,
    extraction: Option<&DMatrix<f64>>,
    thickness: f64,
) -> Result<InterfaceGeometry, FemError> {
    let patch = &mesh.patch;
    let nf = ie.face_dirs.len();
    let counts: Vec<usize> = ie.face_dirs.iter().map(|&d| patch.knot(d).degree() + 1).collect();
    let rule = QuadratureRule::tensor(&counts);
    let scale: f64 = ie.bounds.iter().map(|b| 0.5 * (b[1] - b[0])).product();
    let pts = patch.points();
    let (lower, upper) = (ie.lower(), ie.upper());
    let mut gps = Vec::with_capacity(rule.len());
    for (t, w) in rule.points.iter().zip(&rule.weights) {
        let s = to_param(&ie.bounds, t);
        let (n, dn) = match extraction {
            Some(op) => face_basis_extracted(mesh, ie, op, &t[..nf]),
            None => ie.face_basis(patch, &s[..nf]),
        };
        let mut x = Vector3::zeros();
        let mut a = [Vector3::zeros(), Vector3::zeros()];
        for k in 0..n.len() {
            let pm = (Vector3::from(pts[lower[k]]) + Vector3::from(pts[upper[k]])) * 0.5;
            x += pm * n[k];
            for (d, ad) in a.iter_mut().enumerate().take(nf) {
                *ad += pm * dn[k][d];
            }
        }
        let (frame, measure) = if nf == 1 {
            let len = a[0].norm();
            if !(len > 0.0) {
                return Err(FemError::DegenerateInterface { element: ie.id });
            }
            let t1 = a[0] / len;
            let nvec = if ie.normal_dir == 1 { Vector3::new(-t1[1], t1[0], 0.0) } else { Vector3::new(t1[1], -t1[0], 0.0) };
            (Matrix3::from_rows(&[t1.transpose(), Vector3::z().transpose(), nvec.transpose()]), len * thickness)
        } else {
            let mut nvec = a[0].cross(&a[1]);
            if ie.normal_dir == 1 {
                nvec = -nvec;
            }
            let len = nvec.norm();
            let alen = a[0].norm();
            if !(len > 0.0 && alen > 0.0) {
                return Err(FemError::DegenerateInterface { element: ie.id });
            }
            let nvec = nvec / len;
            let t1 = a[0] / alen;
            let t2 = nvec.cross(&t1);
            (Matrix3::from_rows(&[t1.transpose(), t2.transpose(), nvec.transpose()]), len)
        };
        gps.push(InterfaceGp { n, frame, da: measure * w * scale, x: [x[0], x[1], x[2]] });
    }
    Ok(InterfaceGeometry { gps })
}

#[derive(Debug, Clone, Copy)]
pub enum InterfaceLaw<'a> {
    Cohesive(&'a CohesiveParams),
    Contact(&'a ContactParams),
}

#[derive(Debug, Clone)]
pub struct InterfaceOutput {
    /// Internal force, lower-face unknowns then upper-face ones.
    pub f: Vec<f64>,
    /// Row-major tangent of the same ordering.
    pub k: Vec<f64>,
    pub states: Vec<CohesiveState>,
    /// Area-weighted dissipated energy of the trial states.
    pub dissipated: f64,
}

/// Local jump `(s1, s2, n)` at one integration point.
pub fn local_jump(gp: &InterfaceGp, ue: &[f64], ncomp: usize) -> Vector3<f64> {
    let nf = gp.n.len();
    let mut jump = Vector3::zeros();
    for (a, &na) in gp.n.iter().enumerate() {
        for c in 0..ncomp {
            jump[c] += na * (ue[(nf + a) * ncomp + c] - ue[a * ncomp + c]);
        }
    }
    gp.frame * jump
}

/// Forces and tangent of one interface element for element displacements
/// `ue` (lower-face points then upper-face points, point-major). Cohesive
/// states are the committed ones; the returned states are trial values.
pub fn interface_element(
    geom: &InterfaceGeometry,
    law: InterfaceLaw<'_>,
    states: &[CohesiveState],
    ue: &[f64],
    ncomp: usize,
) -> InterfaceOutput {
    let nf = geom.gps[0].n.len();
    let nd = 2 * nf * ncomp;
    let half = nf * ncomp;
    let mut f = vec![0.0; nd];
    let mut k = vec![0.0; nd * nd];
    let mut new_states = Vec::with_capacity(states.len());
    let mut dissipated = 0.0;
    for (q, gp) in geom.gps.iter().enumerate() {
        let jl = local_jump(gp, ue, ncomp);
        let (t, d) = match law {
            InterfaceLaw::Cohesive(p) => {
                let r = cohesive_update(p, &states[q], &jl);
                new_states.push(r.state);
                dissipated += r.state.dissipated * gp.da;
                (r.traction, r.tangent)
            }
            InterfaceLaw::Contact(p) => contact_update(p, &jl),
        };
        let tg = gp.frame.transpose() * t;
        let dg = gp.frame.transpose() * d * gp.frame;
        for (a, &na) in gp.n.iter().enumerate() {
            for c in 0..ncomp {
                let v = na * tg[c] * gp.da;
                f[half + a * ncomp + c] += v;
                f[a * ncomp + c] -= v;
            }
            for (b, &nb) in gp.n.iter().enumerate() {
                let s = na * nb * gp.da;
                for c in 0..ncomp {
                    for e in 0..ncomp {
                        let v = s * dg[(c, e)];
                        let (r0, c0) = (a * ncomp + c, b * ncomp + e);
                        k[r0 * nd + c0] += v;
                        k[(half + r0) * nd + half + c0] += v;
                        k[r0 * nd + half + c0] -= v;
                        k[(half + r0) * nd + c0] -= v;
                    }
                }
            }
        }
    }
    InterfaceOutput { f, k, states: new_states, dissipated }
}
