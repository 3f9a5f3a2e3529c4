use super::knots::{KnotVector, Side};
use super::SplineError;

/// Homogeneous (weighted) control point `[w x, w y, w z, w]`.
pub type Homogeneous = [f64; 4];

/// A NURBS curve, surface or solid: one knot vector per parametric direction
/// and a tensor control net stored with the first direction fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct NurbsPatch {
    knots: Vec<KnotVector>,
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
    spatial_dim: usize,
}

/// Rational basis at one parameter point of a patch.
#[derive(Debug, Clone)]
pub struct RationalBasis {
    /// Knot span per direction.
    pub spans: Vec<usize>,
    /// Global control-point indices of the non-zero functions, first direction fastest.
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    /// Parametric first derivatives `dR/dxi_d`; empty when not requested.
    pub derivs: Vec<[f64; 3]>,
}

impl NurbsPatch {
    pub fn new(
        knots: Vec<KnotVector>,
        points: Vec<[f64; 3]>,
        weights: Vec<f64>,
        spatial_dim: usize,
    ) -> Result<Self, SplineError> {
        if knots.is_empty() || knots.len() > 3 {
            return Err(SplineError::InvalidPatch("parametric dimension must be 1, 2 or 3".into()));
        }
        if !(2..=3).contains(&spatial_dim) {
            return Err(SplineError::InvalidPatch("spatial dimension must be 2 or 3".into()));
        }
        let expected: usize = knots.iter().map(|k| k.num_basis()).product();
        if points.len() != expected || weights.len() != expected {
            return Err(SplineError::InvalidPatch(format!(
                "control net has {} points / {} weights, knot vectors require {}",
                points.len(),
                weights.len(),
                expected
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(SplineError::InvalidPatch(format!("non-positive weight {w}")));
        }
        let mut points = points;
        if spatial_dim == 2 {
            for p in points.iter_mut() {
                p[2] = 0.0;
            }
        }
        Ok(Self { knots, points, weights, spatial_dim })
    }

    /// Builds a patch from homogeneous control points.
    pub fn from_homogeneous(
        knots: Vec<KnotVector>,
        hpoints: &[Homogeneous],
        spatial_dim: usize,
    ) -> Result<Self, SplineError> {
        let points = hpoints.iter().map(|h| [h[0] / h[3], h[1] / h[3], h[2] / h[3]]).collect();
        let weights = hpoints.iter().map(|h| h[3]).collect();
        Self::new(knots, points, weights, spatial_dim)
    }

    pub fn param_dim(&self) -> usize {
        self.knots.len()
    }

    pub fn spatial_dim(&self) -> usize {
        self.spatial_dim
    }

    pub fn knots(&self) -> &[KnotVector] {
        &self.knots
    }

    pub fn knot(&self, dir: usize) -> &KnotVector {
        &self.knots[dir]
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.knots.iter().map(|k| k.degree()).collect()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.knots.iter().map(|k| k.num_basis()).collect()
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn homogeneous(&self) -> Vec<Homogeneous> {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, &w)| [p[0] * w, p[1] * w, p[2] * w, w])
            .collect()
    }

    /// Linear index of a tensor index (first direction fastest).
    pub fn linear_index(&self, idx: &[usize]) -> usize {
        let counts = self.counts();
        let mut lin = 0;
        let mut stride = 1;
        for (d, &i) in idx.iter().enumerate() {
            lin += i * stride;
            stride *= counts[d];
        }
        lin
    }

    /// Tensor index of a linear index.
    pub fn tensor_index(&self, mut lin: usize) -> Vec<usize> {
        self.counts()
            .iter()
            .map(|&n| {
                let i = lin % n;
                lin /= n;
                i
            })
            .collect()
    }

    /// Mutable access used by geometry builders that perturb the net.
    pub fn set_point(&mut self, index: usize, point: [f64; 3]) {
        self.points[index] = point;
        if self.spatial_dim == 2 {
            self.points[index][2] = 0.0;
        }
    }

    /// Parametric bounds `[first, last]` per direction.
    pub fn domain(&self) -> Vec<[f64; 2]> {
        self.knots.iter().map(|k| [k.first(), k.last()]).collect()
    }

    /// Rational basis at `params` using the usual right-continuous spans.
    pub fn rational_basis(&self, params: &[f64], nderiv: usize) -> Result<RationalBasis, SplineError> {
        self.check_params(params)?;
        let spans = params
            .iter()
            .zip(&self.knots)
            .map(|(&x, k)| k.find_span(x))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.rational_basis_on_spans(params, &spans, nderiv))
    }

    /// Rational basis with explicit one-sided span selection per direction.
    pub fn rational_basis_sided(
        &self,
        params: &[f64],
        sides: &[Side],
        nderiv: usize,
    ) -> Result<RationalBasis, SplineError> {
        self.check_params(params)?;
        let spans = params
            .iter()
            .zip(&self.knots)
            .zip(sides)
            .map(|((&x, k), &s)| k.find_span_side(x, s))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.rational_basis_on_spans(params, &spans, nderiv))
    }

    fn check_params(&self, params: &[f64]) -> Result<(), SplineError> {
        if params.len() != self.param_dim() {
            return Err(SplineError::InvalidPatch(format!(
                "expected {} parameters, got {}",
                self.param_dim(),
                params.len()
            )));
        }
        Ok(())
    }

    /// Rational basis evaluated with the polynomial pieces of the given spans.
    pub fn rational_basis_on_spans(&self, params: &[f64], spans: &[usize], nderiv: usize) -> RationalBasis {
        let dim = self.param_dim();
        let nd = nderiv.min(1);
        let uni: Vec<Vec<Vec<f64>>> = (0..dim)
            .map(|d| self.knots[d].ders_on_span(spans[d], params[d], nd))
            .collect();
        let degs = self.degrees();
        let counts = self.counts();
        let sizes: Vec<usize> = degs.iter().map(|p| p + 1).collect();
        let total: usize = sizes.iter().product();
        let mut indices = Vec::with_capacity(total);
        let mut nw = Vec::with_capacity(total);
        let mut dnw: Vec<[f64; 3]> = Vec::with_capacity(if nd > 0 { total } else { 0 });
        let mut local = vec![0usize; dim];
        for _ in 0..total {
            let mut lin = 0;
            let mut stride = 1;
            let mut val = 1.0;
            for d in 0..dim {
                let gi = spans[d] - degs[d] + local[d];
                lin += gi * stride;
                stride *= counts[d];
                val *= uni[d][0][local[d]];
            }
            let w = self.weights[lin];
            indices.push(lin);
            nw.push(val * w);
            if nd > 0 {
                let mut g = [0.0; 3];
                for (dd, gd) in g.iter_mut().enumerate().take(dim) {
                    let mut v = 1.0;
                    for d in 0..dim {
                        v *= if d == dd { uni[d][1][local[d]] } else { uni[d][0][local[d]] };
                    }
                    *gd = v * w;
                }
                dnw.push(g);
            }
            // advance tensor counter, first direction fastest
            for d in 0..dim {
                local[d] += 1;
                if local[d] < sizes[d] {
                    break;
                }
                local[d] = 0;
            }
        }
        let wsum: f64 = nw.iter().sum();
        assert!(wsum > 0.0, "rational weight function must be positive");
        let values: Vec<f64> = nw.iter().map(|v| v / wsum).collect();
        let derivs = if nd > 0 {
            let mut dw = [0.0; 3];
            for g in &dnw {
                for d in 0..3 {
                    dw[d] += g[d];
                }
            }
            nw.iter()
                .zip(&dnw)
                .map(|(&n, g)| {
                    let mut out = [0.0; 3];
                    for d in 0..dim {
                        out[d] = (g[d] * wsum - n * dw[d]) / (wsum * wsum);
                    }
                    out
                })
                .collect()
        } else {
            Vec::new()
        };
        RationalBasis { spans: spans.to_vec(), indices, values, derivs }
    }

    /// Physical point `x = sum R_I B_I`.
    pub fn eval_point(&self, params: &[f64]) -> Result<[f64; 3], SplineError> {
        let rb = self.rational_basis(params, 0)?;
        Ok(self.combine(&rb))
    }

    pub fn eval_point_sided(&self, params: &[f64], sides: &[Side]) -> Result<[f64; 3], SplineError> {
        let rb = self.rational_basis_sided(params, sides, 0)?;
        Ok(self.combine(&rb))
    }

    /// Point and parametric tangent vectors `dx/dxi_d`.
    pub fn eval_with_tangents(&self, params: &[f64]) -> Result<([f64; 3], Vec<[f64; 3]>), SplineError> {
        let rb = self.rational_basis(params, 1)?;
        let x = self.combine(&rb);
        let mut tangents = vec![[0.0; 3]; self.param_dim()];
        for (k, &i) in rb.indices.iter().enumerate() {
            for (d, t) in tangents.iter_mut().enumerate() {
                for c in 0..3 {
                    t[c] += rb.derivs[k][d] * self.points[i][c];
                }
            }
        }
        Ok((x, tangents))
    }

    fn combine(&self, rb: &RationalBasis) -> [f64; 3] {
        let mut x = [0.0; 3];
        for (&i, &r) in rb.indices.iter().zip(&rb.values) {
            for c in 0..3 {
                x[c] += r * self.points[i][c];
            }
        }
        x
    }

    /// Applies a 1D transformation to every control-net line along `dir`.
    /// `f` receives the homogeneous line and returns the new line; all lines
    /// must come back with the same length.
    pub(crate) fn map_lines<F>(&self, dir: usize, new_knot: KnotVector, mut f: F) -> Result<Self, SplineError>
    where
        F: FnMut(&[Homogeneous]) -> Vec<Homogeneous>,
    {
        let counts = self.counts();
        let hom = self.homogeneous();
        let n_dir = counts[dir];
        let new_n = new_knot.num_basis();
        let stride: usize = counts[..dir].iter().product();
        let outer: usize = counts[dir + 1..].iter().product();
        let mut new_counts = counts.clone();
        new_counts[dir] = new_n;
        let new_total: usize = new_counts.iter().product();
        let mut out = vec![[0.0; 4]; new_total];
        let mut line = Vec::with_capacity(n_dir);
        for o in 0..outer {
            for s in 0..stride {
                line.clear();
                for i in 0..n_dir {
                    line.push(hom[s + stride * (i + n_dir * o)]);
                }
                let new_line = f(&line);
                debug_assert_eq!(new_line.len(), new_n);
                for (i, h) in new_line.into_iter().enumerate() {
                    out[s + stride * (i + new_n * o)] = h;
                }
            }
        }
        let mut knots = self.knots.clone();
        knots[dir] = new_knot;
        Self::from_homogeneous(knots, &out, self.spatial_dim)
    }

    /// Largest distance between any two control points; a size scale.
    pub fn diameter(&self) -> f64 {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.points {
            for c in 0..3 {
                lo[c] = lo[c].min(p[c]);
                hi[c] = hi[c].max(p[c]);
            }
        }
        (0..3).map(|c| (hi[c] - lo[c]).powi(2)).sum::<f64>().sqrt()
    }

    /// Ruled surface/solid by translating this patch along `dir` (one new
    /// linear direction appended).
    pub fn extrude(&self, offset: [f64; 3]) -> Result<Self, SplineError> {
        if self.param_dim() >= 3 {
            return Err(SplineError::InvalidPatch("cannot extrude a solid".into()));
        }
        let mut knots = self.knots.clone();
        knots.push(KnotVector::from_raw(vec![0.0, 0.0, 1.0, 1.0], 1));
        let mut points = self.points.clone();
        let mut weights = self.weights.clone();
        for (p, &w) in self.points.iter().zip(&self.weights) {
            points.push([p[0] + offset[0], p[1] + offset[1], p[2] + offset[2]]);
            weights.push(w);
        }
        Self::new(knots, points, weights, 3)
    }
}

pub(crate) fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> NurbsPatch {
        let kv = KnotVector::new(vec![0., 0., 1., 1.], 1).unwrap();
        NurbsPatch::new(
            vec![kv.clone(), kv],
            vec![[0., 0., 0.], [1., 0., 0.], [0., 1., 0.], [1., 1., 0.]],
            vec![1.0; 4],
            2,
        )
        .unwrap()
    }

    #[test]
    fn bilinear_map_center() {
        let p = unit_square();
        let x = p.eval_point(&[0.5, 0.5]).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-15 && (x[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_weights_and_counts() {
        let kv = KnotVector::new(vec![0., 0., 1., 1.], 1).unwrap();
        assert!(NurbsPatch::new(vec![kv.clone()], vec![[0.; 3], [1., 0., 0.]], vec![1.0, 0.0], 2).is_err());
        assert!(NurbsPatch::new(vec![kv], vec![[0.; 3]], vec![1.0], 2).is_err());
    }

    #[test]
    fn tensor_index_round_trip() {
        let p = unit_square();
        for i in 0..p.num_points() {
            assert_eq!(p.linear_index(&p.tensor_index(i)), i);
        }
    }

    #[test]
    fn extrude_makes_solid() {
        let s = unit_square().extrude([0., 0., 2.]).unwrap();
        assert_eq!(s.param_dim(), 3);
        let x = s.eval_point(&[1.0, 1.0, 0.5]).unwrap();
        assert!((x[2] - 1.0).abs() < 1e-15 && (x[0] - 1.0).abs() < 1e-15);
    }
}
