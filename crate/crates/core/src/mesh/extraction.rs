use nalgebra::DMatrix;

use super::connectivity::{Element, IgaMesh};
use super::interface::InterfaceElement;
use crate::spline::{KnotVector, NurbsPatch, KNOT_TOL};

/// 1D extraction operators, one per non-zero span, by Bezier decomposition
/// (repeated insertion of every interior knot up to multiplicity p).
///
/// Returns `(span index, C)` pairs with `N_local = C * B` where `B` is the
/// Bernstein vector on the parent interval `[-1, 1]`.
pub fn extraction_1d(kv: &KnotVector) -> Vec<(usize, DMatrix<f64>)> {
    let u = kv.values();
    let p = kv.degree();
    let m = u.len();
    let spans = kv.nonzero_spans();
    let mut ops: Vec<DMatrix<f64>> = vec![DMatrix::identity(p + 1, p + 1)];
    let mut a = p;
    let mut b = a + 1;
    let mut alphas = vec![0.0; p + 1];
    while b < m - 1 {
        let mut next = DMatrix::identity(p + 1, p + 1);
        let i = b;
        while b < m - 1 && (u[b + 1] - u[b]).abs() <= KNOT_TOL {
            b += 1;
        }
        let mult = b - i + 1;
        if mult < p {
            let numer = u[b] - u[a];
            for j in (mult + 1..=p).rev() {
                alphas[j - mult - 1] = numer / (u[a + j] - u[a]);
            }
            let r = p - mult;
            let cur = ops.last_mut().expect("operator");
            for j in 1..=r {
                let save = r - j;
                let s = mult + j;
                for k in (s..=p).rev() {
                    let alpha = alphas[k - s];
                    for row in 0..=p {
                        cur[(row, k)] = alpha * cur[(row, k)] + (1.0 - alpha) * cur[(row, k - 1)];
                    }
                }
                if b < m - 1 {
                    for q in 0..=j {
                        next[(save + q, save)] = cur[(p - j + q, p)];
                    }
                }
            }
        }
        if b < m - 1 {
            ops.push(next);
            a = b;
            b += 1;
        }
    }
    ops.truncate(spans.len());
    spans.into_iter().zip(ops).collect()
}

/// Bernstein polynomials of degree `p` on `[-1, 1]` and their derivatives.
pub fn bernstein(p: usize, t: f64) -> (Vec<f64>, Vec<f64>) {
    let s0 = 0.5 * (1.0 - t);
    let s1 = 0.5 * (1.0 + t);
    let mut vals = vec![0.0; p + 1];
    let mut ders = vec![0.0; p + 1];
    let lower = bernstein_raw(p.saturating_sub(1), s0, s1);
    for i in 0..=p {
        vals[i] = binom(p, i) * s0.powi((p - i) as i32) * s1.powi(i as i32);
        if p > 0 {
            // dB_i^p/dt = p/2 (B_{i-1}^{p-1} - B_i^{p-1})
            let left = if i > 0 { lower[i - 1] } else { 0.0 };
            let right = if i < p { lower[i] } else { 0.0 };
            ders[i] = 0.5 * p as f64 * (left - right);
        }
    }
    (vals, ders)
}

fn bernstein_raw(p: usize, s0: f64, s1: f64) -> Vec<f64> {
    (0..=p).map(|i| binom(p, i) * s0.powi((p - i) as i32) * s1.powi(i as i32)).collect()
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Extraction operators for a whole mesh: per-direction 1D operators,
/// combined on demand by Kronecker products.
#[derive(Debug, Clone)]
pub struct BezierExtractionSet {
    /// `per_dir[d]` holds `(span, C)` pairs for direction `d`.
    pub per_dir: Vec<Vec<(usize, DMatrix<f64>)>>,
    pub degrees: Vec<usize>,
}

impl BezierExtractionSet {
    pub fn op_1d(&self, dir: usize, span: usize) -> &DMatrix<f64> {
        let list = &self.per_dir[dir];
        let k = list.binary_search_by_key(&span, |(s, _)| *s).expect("span without extraction operator");
        &list[k].1
    }

    fn kron_dirs(&self, dirs: &[usize], spans: &[usize]) -> DMatrix<f64> {
        let mut op = DMatrix::identity(1, 1);
        for (&d, &s) in dirs.iter().zip(spans) {
            // first direction fastest: later directions are the outer factor
            op = self.op_1d(d, s).kronecker(&op);
        }
        op
    }

    pub fn element_operator(&self, e: &Element) -> DMatrix<f64> {
        let dirs: Vec<usize> = (0..e.spans.len()).collect();
        self.kron_dirs(&dirs, &e.spans)
    }

    pub fn face_operator(&self, ie: &InterfaceElement) -> DMatrix<f64> {
        self.kron_dirs(&ie.face_dirs, &ie.face_spans)
    }

    /// All element operators in element order.
    pub fn element_operators(&self, mesh: &IgaMesh) -> Vec<DMatrix<f64>> {
        mesh.elements.iter().map(|e| self.element_operator(e)).collect()
    }
}

pub fn bezier_extraction(mesh: &IgaMesh) -> BezierExtractionSet {
    let patch = &mesh.patch;
    BezierExtractionSet {
        per_dir: patch.knots().iter().map(extraction_1d).collect(),
        degrees: patch.degrees(),
    }
}

/// Tensor Bernstein values and parent-domain derivatives (first direction
/// fastest).
pub fn tensor_bernstein(degrees: &[usize], t: &[f64]) -> (Vec<f64>, Vec<[f64; 3]>) {
    let uni: Vec<(Vec<f64>, Vec<f64>)> = degrees.iter().zip(t).map(|(&p, &x)| bernstein(p, x)).collect();
    let mut vals = vec![1.0];
    let mut ders: Vec<[f64; 3]> = vec![[1.0; 3]];
    for (d, (v, dv)) in uni.iter().enumerate() {
        let mut nv = Vec::with_capacity(vals.len() * v.len());
        let mut nd = Vec::with_capacity(vals.len() * v.len());
        for (i, &vi) in v.iter().enumerate() {
            for (k, &prev) in vals.iter().enumerate() {
                nv.push(prev * vi);
                let mut g = ders[k];
                for (dd, gd) in g.iter_mut().enumerate().take(degrees.len()) {
                    *gd *= if dd == d { dv[i] } else { vi };
                }
                nd.push(g);
            }
        }
        vals = nv;
        ders = nd;
    }
    for g in ders.iter_mut() {
        for gd in g.iter_mut().skip(degrees.len()) {
            *gd = 0.0;
        }
    }
    (vals, ders)
}

/// Rational basis of an element through its extraction operator, at parent
/// coordinates `t` in `[-1,1]^d`. Derivatives are with respect to the
/// parametric (knot) coordinates.
pub fn extracted_basis(
    patch: &NurbsPatch,
    element: &Element,
    op: &DMatrix<f64>,
    t: &[f64],
) -> (Vec<f64>, Vec<[f64; 3]>) {
    let dim = t.len();
    let (bv, bd) = tensor_bernstein(&patch.degrees(), t);
    let n = op.nrows();
    let jac: Vec<f64> = element.bounds.iter().map(|b| 2.0 / (b[1] - b[0])).collect();
    let mut nw = vec![0.0; n];
    let mut dnw = vec![[0.0; 3]; n];
    for a in 0..n {
        let w = patch.weights()[element.conn[a]];
        let mut v = 0.0;
        let mut g = [0.0; 3];
        for b in 0..op.ncols() {
            let c = op[(a, b)];
            if c != 0.0 {
                v += c * bv[b];
                for d in 0..dim {
                    g[d] += c * bd[b][d];
                }
            }
        }
        nw[a] = v * w;
        for d in 0..dim {
            dnw[a][d] = g[d] * w * jac[d];
        }
    }
    let ws: f64 = nw.iter().sum();
    let mut dws = [0.0; 3];
    for g in &dnw {
        for d in 0..dim {
            dws[d] += g[d];
        }
    }
    let vals: Vec<f64> = nw.iter().map(|v| v / ws).collect();
    let ders = (0..n)
        .map(|a| {
            let mut g = [0.0; 3];
            for d in 0..dim {
                g[d] = (dnw[a][d] - vals[a] * dws[d]) / ws;
            }
            g
        })
        .collect();
    (vals, ders)
}
