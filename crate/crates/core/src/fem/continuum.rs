use nalgebra::{DMatrix, Matrix3};

use super::quadrature::QuadratureRule;
use super::FemError;
use crate::mesh::{extracted_basis, Element, IgaMesh};

/// How basis functions are evaluated at integration points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BasisPath {
    /// Cox-de Boor on the element's knot spans.
    #[default]
    Direct,
    /// Bernstein polynomials through the element extraction operator.
    Extraction,
}

/// Cached integration-point data of one continuum element.
#[derive(Debug, Clone)]
pub struct GaussPoint {
    pub n: Vec<f64>,
    /// Physical gradients of the basis.
    pub dndx: Vec<[f64; 3]>,
    /// `det J * weights * thickness`.
    pub dv: f64,
    pub x: [f64; 3],
    pub param: [f64; 3],
    /// Angle (degrees) in the (x, y) plane of the frame direction's tangent.
    pub frame: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ContinuumGeometry {
    pub gps: Vec<GaussPoint>,
}

/// Maps parent coordinates to the element's parametric box.
pub(crate) fn to_param(bounds: &[[f64; 2]], t: &[f64; 3]) -> [f64; 3] {
    let mut x = [0.0; 3];
    for (d, b) in bounds.iter().enumerate() {
        x[d] = b[0] + 0.5 * (t[d] + 1.0) * (b[1] - b[0]);
    }
    x
}

/// Integration-point geometry of `element` with `(p+1)` Gauss points per
/// direction. `extraction` selects the Bezier path when given.
pub fn continuum_geometry(
    mesh: &IgaMesh,
    element: &Element,
    extraction: Option<&DMatrix<f64>>,
    thickness: f64,
    frame_dir: Option<usize>,
) -> Result<ContinuumGeometry, FemError> {
    let patch = &mesh.patch;
    let dim = patch.param_dim();
    let sdim = patch.spatial_dim();
    if dim != sdim {
        return Err(FemError::Config(format!("continuum elements need param_dim = spatial_dim, got {dim}/{sdim}")));
    }
    let counts: Vec<usize> = patch.degrees().iter().map(|p| p + 1).collect();
    let rule = QuadratureRule::tensor(&counts);
    let scale: f64 = element.bounds.iter().map(|b| 0.5 * (b[1] - b[0])).product();
    let pts = patch.points();
    let mut gps = Vec::with_capacity(rule.len());
    for (t, w) in rule.points.iter().zip(&rule.weights) {
        let param = to_param(&element.bounds, t);
        let (n, dn) = match extraction {
            Some(op) => extracted_basis(patch, element, op, &t[..dim]),
            None => {
                let rb = patch.rational_basis_on_spans(&param[..dim], &element.spans, 1);
                (rb.values, rb.derivs)
            }
        };
        // J[i][j] = dx_i / dxi_j
        let mut jac = Matrix3::zeros();
        for d in dim..3 {
            jac[(d, d)] = 1.0;
        }
        let mut x = [0.0; 3];
        for (a, &g) in element.conn.iter().enumerate() {
            for i in 0..sdim {
                x[i] += n[a] * pts[g][i];
                for j in 0..dim {
                    jac[(i, j)] += dn[a][j] * pts[g][i];
                }
            }
        }
        let det = jac.determinant();
        if !(det > 0.0) {
            return Err(FemError::DistortedElement { element: element.id, det });
        }
        let jinv_t = jac.try_inverse().expect("non-singular Jacobian").transpose();
        let dndx = dn
            .iter()
            .map(|g| {
                let v = jinv_t * nalgebra::Vector3::new(g[0], g[1], g[2]);
                let mut out = [v[0], v[1], v[2]];
                for o in out.iter_mut().skip(dim) {
                    *o = 0.0;
                }
                out
            })
            .collect();
        let frame = frame_dir.map(|fd| jac[(1, fd)].atan2(jac[(0, fd)]).to_degrees());
        gps.push(GaussPoint { n, dndx, dv: det * w * scale * thickness, x, param, frame });
    }
    Ok(ContinuumGeometry { gps })
}

/// Strain-displacement matrix in Voigt form (xx, yy, xy) or
/// (xx, yy, zz, yz, xz, xy) with engineering shear.
pub fn b_matrix(gp: &GaussPoint, dim: usize) -> DMatrix<f64> {
    let nn = gp.dndx.len();
    let nv = if dim == 2 { 3 } else { 6 };
    let mut b = DMatrix::zeros(nv, nn * dim);
    for (a, g) in gp.dndx.iter().enumerate() {
        if dim == 2 {
            b[(0, 2 * a)] = g[0];
            b[(1, 2 * a + 1)] = g[1];
            b[(2, 2 * a)] = g[1];
            b[(2, 2 * a + 1)] = g[0];
        } else {
            let c = 3 * a;
            b[(0, c)] = g[0];
            b[(1, c + 1)] = g[1];
            b[(2, c + 2)] = g[2];
            b[(3, c + 1)] = g[2];
            b[(3, c + 2)] = g[1];
            b[(4, c)] = g[2];
            b[(4, c + 2)] = g[0];
            b[(5, c)] = g[1];
            b[(5, c + 1)] = g[0];
        }
    }
    b
}

/// `K_e = sum B^T C B dV` with one constitutive matrix per Gauss point.
pub fn element_stiffness(geom: &ContinuumGeometry, cmats: &[DMatrix<f64>], dim: usize) -> DMatrix<f64> {
    let nd = geom.gps[0].n.len() * dim;
    let mut k = DMatrix::zeros(nd, nd);
    for (gp, c) in geom.gps.iter().zip(cmats) {
        let b = b_matrix(gp, dim);
        let cb = c * &b;
        k.gemm_tr(gp.dv, &b, &cb, 1.0);
    }
    k
}

/// Stress at a Gauss point for element displacements `ue` (point-major).
pub fn gauss_stress(gp: &GaussPoint, c: &DMatrix<f64>, dim: usize, ue: &[f64]) -> Vec<f64> {
    let b = b_matrix(gp, dim);
    let eps = &b * nalgebra::DVector::from_column_slice(ue);
    (c * eps).iter().copied().collect()
}

/// `f_int = sum B^T sigma dV`.
pub fn element_internal_force(geom: &ContinuumGeometry, cmats: &[DMatrix<f64>], dim: usize, ue: &[f64]) -> Vec<f64> {
    let nd = ue.len();
    let mut f = nalgebra::DVector::zeros(nd);
    let u = nalgebra::DVector::from_column_slice(ue);
    for (gp, c) in geom.gps.iter().zip(cmats) {
        let b = b_matrix(gp, dim);
        let sig = c * (&b * &u);
        f.gemv_tr(gp.dv, &b, &sig, 1.0);
    }
    f.iter().copied().collect()
}

/// Consistent mass `int rho N^T N dV`, expanded to `dim` components.
pub fn mass_matrix(geom: &ContinuumGeometry, rho: f64, dim: usize) -> DMatrix<f64> {
    let nn = geom.gps[0].n.len();
    let mut m = DMatrix::zeros(nn * dim, nn * dim);
    for gp in &geom.gps {
        for a in 0..nn {
            for b in 0..nn {
                let v = rho * gp.n[a] * gp.n[b] * gp.dv;
                for c in 0..dim {
                    m[(a * dim + c, b * dim + c)] += v;
                }
            }
        }
    }
    m
}
