use nalgebra::{DMatrix, Matrix3, Matrix6, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::MaterialError;

/// Transversely isotropic ply (fibre direction 1, isotropic 2-3 plane).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlyElasticity {
    pub e11: f64,
    /// `E22 = E33`
    pub e22: f64,
    /// `G12 = G13`
    pub g12: f64,
    /// `nu12 = nu13`
    pub nu12: f64,
    pub nu23: f64,
    /// Mass density, tonne/mm^3.
    #[serde(default)]
    pub density: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    PlaneStrain,
    ThreeD,
}

impl PlyElasticity {
    pub fn isotropic(e: f64, nu: f64) -> Self {
        Self { e11: e, e22: e, g12: e / (2.0 * (1.0 + nu)), nu12: nu, nu23: nu, density: 0.0 }
    }

    pub fn with_density(mut self, rho: f64) -> Self {
        self.density = rho;
        self
    }

    pub fn g23(&self) -> f64 {
        self.e22 / (2.0 * (1.0 + self.nu23))
    }

    /// 6x6 stiffness in material axes, Voigt order (11,22,33,23,13,12) with
    /// engineering shear strains.
    pub fn material_stiffness(&self) -> Result<Matrix6<f64>, MaterialError> {
        if !(self.e11 > 0.0 && self.e22 > 0.0 && self.g12 > 0.0 && self.nu23 > -1.0) {
            return Err(MaterialError::Parameter(format!("non-positive elastic moduli in {self:?}")));
        }
        let (e1, e2) = (self.e11, self.e22);
        let mut s = Matrix6::zeros();
        s[(0, 0)] = 1.0 / e1;
        s[(1, 1)] = 1.0 / e2;
        s[(2, 2)] = 1.0 / e2;
        s[(0, 1)] = -self.nu12 / e1;
        s[(0, 2)] = -self.nu12 / e1;
        s[(1, 2)] = -self.nu23 / e2;
        s[(1, 0)] = s[(0, 1)];
        s[(2, 0)] = s[(0, 2)];
        s[(2, 1)] = s[(1, 2)];
        s[(3, 3)] = 1.0 / self.g23();
        s[(4, 4)] = 1.0 / self.g12;
        s[(5, 5)] = 1.0 / self.g12;
        let c = s
            .try_inverse()
            .ok_or_else(|| MaterialError::Parameter("singular compliance matrix".into()))?;
        let eig = SymmetricEigen::new(c);
        if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
            return Err(MaterialError::Parameter(format!(
                "stiffness matrix is not positive definite for {self:?}"
            )));
        }
        Ok(c)
    }
}

const VOIGT: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];

fn voigt_index(i: usize, j: usize) -> usize {
    match (i.min(j), i.max(j)) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (1, 2) => 3,
        (0, 2) => 4,
        _ => 5,
    }
}

/// Rotates a Voigt stiffness with the orthogonal matrix `a`
/// (`a[(i, p)]` = component of material axis `p` along global axis `i`).
pub fn rotate_stiffness(c: &Matrix6<f64>, a: &Matrix3<f64>) -> Matrix6<f64> {
    let mut out = Matrix6::zeros();
    for (m, &(i, j)) in VOIGT.iter().enumerate() {
        for (n, &(k, l)) in VOIGT.iter().enumerate().skip(m) {
            let mut sum = 0.0;
            for p in 0..3 {
                for q in 0..3 {
                    let apq = a[(i, p)] * a[(j, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let row = voigt_index(p, q);
                    for r in 0..3 {
                        for s in 0..3 {
                            sum += apq * a[(k, r)] * a[(l, s)] * c[(row, voigt_index(r, s))];
                        }
                    }
                }
            }
            out[(m, n)] = sum;
            out[(n, m)] = sum;
        }
    }
    out
}

/// Orientation of the material axes for a ply rotated by `angle` degrees
/// about the through-thickness axis.
///
/// Without a frame in 3D, thickness is global z. Otherwise the laminate is
/// stacked in the (x, y) plane: y is through the thickness and z the width
/// direction, turned by `frame` degrees about z (used to follow curved
/// laminates); plane strain always uses this layout.
fn axes(angle: f64, regime: Regime, frame: Option<f64>) -> Matrix3<f64> {
    let (s, c) = angle.to_radians().sin_cos();
    match (regime, frame) {
        (Regime::ThreeD, None) => Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
        (_, frame) => {
            let frame = frame.unwrap_or(0.0);
            // columns: material 1, 2, 3 in (x, y, z)
            let a0 = Matrix3::new(c, -s, 0.0, 0.0, 0.0, 1.0, s, c, 0.0);
            let (sf, cf) = frame.to_radians().sin_cos();
            let q = Matrix3::new(cf, -sf, 0.0, sf, cf, 0.0, 0.0, 0.0, 1.0);
            q * a0
        }
    }
}

/// Global stiffness for a ply at `angle` degrees: 3x3 (xx, yy, xy) in plane
/// strain, 6x6 (xx, yy, zz, yz, xz, xy) in 3D.
pub fn elasticity_matrix(ply: &PlyElasticity, angle: f64, regime: Regime) -> Result<DMatrix<f64>, MaterialError> {
    elasticity_matrix_in_frame(ply, angle, regime, None)
}

pub fn elasticity_matrix_in_frame(
    ply: &PlyElasticity,
    angle: f64,
    regime: Regime,
    frame: Option<f64>,
) -> Result<DMatrix<f64>, MaterialError> {
    let c = rotate_stiffness(&ply.material_stiffness()?, &axes(angle, regime, frame));
    Ok(match regime {
        Regime::ThreeD => DMatrix::from_iterator(6, 6, c.iter().copied()),
        Regime::PlaneStrain => {
            let idx = [0, 1, 5];
            DMatrix::from_fn(3, 3, |i, j| c[(idx[i], idx[j])])
        }
    })
}
