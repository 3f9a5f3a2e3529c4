/// Gauss-Legendre points and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "quadrature needs at least one point");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Tensor-product rule on the parent cube; points carry unused trailing zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// `counts[d]` points per direction, first direction fastest.
    pub fn tensor(counts: &[usize]) -> Self {
        let rules: Vec<(Vec<f64>, Vec<f64>)> = counts.iter().map(|&n| gauss_legendre(n)).collect();
        let mut points = vec![[0.0; 3]];
        let mut weights = vec![1.0];
        for (d, (x, w)) in rules.iter().enumerate() {
            let mut np = Vec::with_capacity(points.len() * x.len());
            let mut nw = Vec::with_capacity(points.len() * x.len());
            for (xi, wi) in x.iter().zip(w) {
                for (p, pw) in points.iter().zip(&weights) {
                    let mut q = *p;
                    q[d] = *xi;
                    np.push(q);
                    nw.push(pw * wi);
                }
            }
            points = np;
            weights = nw;
        }
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        for n in 1..=8 {
            let (x, w) = gauss_legendre(n);
            assert!(w.iter().all(|&wi| wi > 0.0));
            for deg in 0..2 * n {
                let num: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((num - exact).abs() < 1e-14, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn tensor_weights_sum_to_volume() {
        let q = QuadratureRule::tensor(&[3, 2, 4]);
        assert_eq!(q.len(), 24);
        assert!((q.weights.iter().sum::<f64>() - 8.0).abs() < 1e-13);
        let q2 = QuadratureRule::tensor(&[5, 3]);
        assert!((q2.weights.iter().sum::<f64>() - 4.0).abs() < 1e-13);
    }
}
