//! Open knot vectors and the Cox-de Boor basis.

use super::SplineError;

/// Absolute tolerance used for knot equality and multiplicity queries.
pub const KNOT_TOL: f64 = 1e-10;

/// Which one-sided limit to take when a parameter sits exactly on a knot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Limit from below; a knot value belongs to the span on its left.
    Left,
    /// Limit from above (the usual half-open convention).
    Right,
}

/// An open (clamped) knot vector together with its polynomial degree.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    values: Vec<f64>,
    degree: usize,
}

/// Non-zero basis functions (and derivatives) at one parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisEval {
    /// Knot span index `i` with `values[i] <= xi < values[i+1]`.
    pub span: usize,
    /// `ders[k][j]` is the k-th derivative of basis `span - p + j`.
    pub ders: Vec<Vec<f64>>,
}

impl BasisEval {
    pub fn values(&self) -> &[f64] {
        &self.ders[0]
    }

    /// Global index of the first non-zero basis function.
    pub fn first_index(&self, degree: usize) -> usize {
        self.span - degree
    }
}

impl KnotVector {
    pub fn new(values: Vec<f64>, degree: usize) -> Result<Self, SplineError> {
        let kv = Self { values, degree };
        kv.validate()?;
        Ok(kv)
    }

    /// Open knot vector on [0, 1] with `spans` uniform elements.
    pub fn open_uniform(degree: usize, spans: usize) -> Self {
        let spans = spans.max(1);
        let mut values = vec![0.0; degree + 1];
        for i in 1..spans {
            values.push(i as f64 / spans as f64);
        }
        values.extend(std::iter::repeat(1.0).take(degree + 1));
        Self { values, degree }
    }

    fn validate(&self) -> Result<(), SplineError> {
        let p = self.degree;
        let v = &self.values;
        let bad = |reason: &str| SplineError::InvalidKnots(reason.to_string());
        if v.len() < 2 * (p + 1) {
            return Err(bad("too few knots for the degree"));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(bad("non-finite knot value"));
        }
        if v.windows(2).any(|w| w[1] < w[0]) {
            return Err(bad("knots must be non-decreasing"));
        }
        let (first, last) = (v[0], v[v.len() - 1]);
        if last - first <= KNOT_TOL {
            return Err(bad("empty parametric range"));
        }
        let head = v.iter().take_while(|&&x| (x - first).abs() <= KNOT_TOL).count();
        let tail = v.iter().rev().take_while(|&&x| (x - last).abs() <= KNOT_TOL).count();
        if head != p + 1 || tail != p + 1 {
            return Err(bad("knot vector is not open (ends must repeat exactly p+1 times)"));
        }
        let mut i = head;
        while i < v.len() - tail {
            let m = self.multiplicity(v[i]);
            if m > p + 1 {
                return Err(bad("interior multiplicity exceeds p+1"));
            }
            i += m;
        }
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of basis functions `n = len - p - 1`.
    pub fn num_basis(&self) -> usize {
        self.values.len() - self.degree - 1
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Number of knots equal to `x` within [`KNOT_TOL`].
    pub fn multiplicity(&self, x: f64) -> usize {
        self.values.iter().filter(|&&k| (k - x).abs() <= KNOT_TOL).count()
    }

    /// Distinct knot values in increasing order.
    pub fn unique(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &k in &self.values {
            match out.last() {
                Some(&l) if (k - l).abs() <= KNOT_TOL => {}
                _ => out.push(k),
            }
        }
        out
    }

    /// Indices `i` of non-zero knot spans `[values[i], values[i+1])`.
    pub fn nonzero_spans(&self) -> Vec<usize> {
        (self.degree..self.num_basis())
            .filter(|&i| self.values[i + 1] - self.values[i] > KNOT_TOL)
            .collect()
    }

    fn check_domain(&self, xi: f64) -> Result<f64, SplineError> {
        let (a, b) = (self.values[self.degree], self.values[self.num_basis()]);
        if !xi.is_finite() || xi < a - KNOT_TOL || xi > b + KNOT_TOL {
            return Err(SplineError::Domain { value: xi, lower: a, upper: b });
        }
        Ok(xi.clamp(a, b))
    }

    /// Knot span containing `xi`; the right end maps to the last non-zero span.
    pub fn find_span(&self, xi: f64) -> Result<usize, SplineError> {
        self.find_span_side(xi, Side::Right)
    }

    /// Span lookup with an explicit one-sided convention at knot values.
    pub fn find_span_side(&self, xi: f64, side: Side) -> Result<usize, SplineError> {
        let xi = self.check_domain(xi)?;
        let n = self.num_basis();
        let p = self.degree;
        let v = &self.values;
        match side {
            Side::Right => {
                if xi >= v[n] {
                    // end clamp: last span with positive length
                    let mut i = n - 1;
                    while v[i + 1] - v[i] <= KNOT_TOL && i > p {
                        i -= 1;
                    }
                    return Ok(i);
                }
                // largest i in [p, n-1] with v[i] <= xi
                let (mut lo, mut hi) = (p, n);
                while hi - lo > 1 {
                    let mid = (lo + hi) / 2;
                    if xi < v[mid] {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                Ok(lo)
            }
            Side::Left => {
                if xi <= v[p] {
                    let mut i = p;
                    while v[i + 1] - v[i] <= KNOT_TOL && i < n - 1 {
                        i += 1;
                    }
                    return Ok(i);
                }
                // smallest i in [p, n-1] with xi <= v[i+1]
                let (mut lo, mut hi) = (p, n - 1);
                while lo < hi {
                    let mid = (lo + hi) / 2;
                    if xi <= v[mid + 1] {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                Ok(lo)
            }
        }
    }

    /// Non-zero basis functions and derivatives up to `nderiv` at `xi`.
    pub fn basis_functions(&self, xi: f64, nderiv: usize) -> Result<BasisEval, SplineError> {
        let span = self.find_span(xi)?;
        let xi = self.check_domain(xi)?;
        Ok(BasisEval { span, ders: self.ders_on_span(span, xi, nderiv) })
    }

    /// Basis derivatives on a given span (the parameter may sit on the span
    /// boundary; the polynomial piece of that span is evaluated).
    pub fn ders_on_span(&self, span: usize, xi: f64, nderiv: usize) -> Vec<Vec<f64>> {
        let p = self.degree;
        let u = &self.values;
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = xi - u[span + 1 - j];
            right[j] = u[span + j] - xi;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }
        let mut ders = vec![vec![0.0; p + 1]; nderiv + 1];
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }
        let mut a = vec![vec![0.0; p + 1]; 2];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0][0] = 1.0;
            for k in 1..=nderiv.min(p) {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = p as isize - k as isize;
                if r >= k {
                    a[s2][0] = a[s1][0] / ndu[(pk + 1) as usize][rk as usize];
                    d = a[s2][0] * ndu[rk as usize][pk as usize];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if (r as isize - 1) <= pk { k - 1 } else { p - r };
                for j in j1..=j2 {
                    let idx = (rk + j as isize) as usize;
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[(pk + 1) as usize][idx];
                    d += a[s2][j] * ndu[idx][pk as usize];
                }
                if r as isize <= pk {
                    a[s2][k] = -a[s1][k - 1] / ndu[(pk + 1) as usize][r];
                    d += a[s2][k] * ndu[r][pk as usize];
                }
                ders[k][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut factor = p as f64;
        for k in 1..=nderiv.min(p) {
            for v in ders[k].iter_mut() {
                *v *= factor;
            }
            factor *= (p - k) as f64;
        }
        ders
    }

    /// Value of the single basis function `i` at `xi` (all of them, dense).
    pub fn dense_values(&self, xi: f64) -> Result<Vec<f64>, SplineError> {
        let ev = self.basis_functions(xi, 0)?;
        let mut out = vec![0.0; self.num_basis()];
        let first = ev.first_index(self.degree);
        for (j, v) in ev.values().iter().enumerate() {
            out[first + j] = *v;
        }
        Ok(out)
    }

    pub(crate) fn from_raw(values: Vec<f64>, degree: usize) -> Self {
        Self { values, degree }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> KnotVector {
        KnotVector::new(vec![0., 0., 0., 1., 2., 3., 4., 4., 5., 5., 5.], 2).unwrap()
    }

    #[test]
    fn find_span_examples() {
        let kv = fig1();
        // linear scan oracle
        let scan = |x: f64| (0..kv.len() - 1).rev().find(|&i| kv.values()[i] <= x && x < kv.values()[i + 1]);
        assert_eq!(kv.find_span(2.5).unwrap(), scan(2.5).unwrap());
        assert_eq!(kv.values()[kv.find_span(2.5).unwrap()], 2.0);
        assert_eq!(kv.find_span(0.0).unwrap(), 2);
        let last = kv.find_span(5.0).unwrap();
        assert_eq!((kv.values()[last], kv.values()[last + 1]), (4.0, 5.0));
        for k in 0..500 {
            let x = 5.0 * k as f64 / 500.0;
            assert_eq!(kv.find_span(x).unwrap(), scan(x).unwrap(), "x = {x}");
        }
    }

    #[test]
    fn find_span_left_limit() {
        let kv = fig1();
        let s = kv.find_span_side(4.0, Side::Left).unwrap();
        assert_eq!((kv.values()[s], kv.values()[s + 1]), (3.0, 4.0));
        let s = kv.find_span_side(0.0, Side::Left).unwrap();
        assert_eq!(s, 2);
        let s = kv.find_span_side(2.5, Side::Left).unwrap();
        assert_eq!(kv.values()[s], 2.0);
    }

    #[test]
    fn out_of_range_is_domain_error() {
        let kv = fig1();
        assert!(matches!(kv.find_span(-0.1), Err(SplineError::Domain { .. })));
        assert!(matches!(kv.find_span(5.5), Err(SplineError::Domain { .. })));
        assert!(kv.find_span(f64::NAN).is_err());
    }

    #[test]
    fn interpolatory_at_ends_and_repeated_knot() {
        let kv = fig1();
        let v0 = kv.dense_values(0.0).unwrap();
        assert_eq!(v0[0], 1.0);
        assert!(v0[1..].iter().all(|&x| x == 0.0));
        let v4 = kv.dense_values(4.0).unwrap();
        let ones: Vec<usize> = (0..v4.len()).filter(|&i| (v4[i] - 1.0).abs() < 1e-14).collect();
        assert_eq!(ones.len(), 1);
        assert!(v4.iter().enumerate().all(|(i, &x)| i == ones[0] || x.abs() < 1e-14));
        // basis index associated with the double knot at 4 is N_5 (0-based)
        assert_eq!(ones[0], 5);
        let v5 = kv.dense_values(5.0).unwrap();
        assert!((v5[kv.num_basis() - 1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn validation_rejects_bad_vectors() {
        assert!(KnotVector::new(vec![0., 0., 1., 1.], 2).is_err());
        assert!(KnotVector::new(vec![0., 0., 0., 0.5, 0.4, 1., 1., 1.], 2).is_err());
        assert!(KnotVector::new(vec![0., 0., 0., 0.5, 0.5, 0.5, 0.5, 1., 1., 1.], 2).is_err());
        assert!(KnotVector::new(vec![0., 0., 0., 0.5, 0.5, 0.5, 1., 1., 1.], 2).is_ok());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let kv = fig1();
        let h = 1e-6;
        for &x in &[0.3, 1.7, 2.5, 3.9, 4.6] {
            let ev = kv.basis_functions(x, 2).unwrap();
            let lo = kv.ders_on_span(ev.span, x - h, 0);
            let hi = kv.ders_on_span(ev.span, x + h, 0);
            for j in 0..3 {
                let fd = (hi[0][j] - lo[0][j]) / (2.0 * h);
                assert!((fd - ev.ders[1][j]).abs() < 1e-6 * (1.0 + fd.abs()));
            }
        }
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn knot_vector() -> impl Strategy<Value = KnotVector> {
        (1usize..5, prop::collection::vec(0.05f64..1.0, 1..8)).prop_map(|(p, gaps)| {
            let mut v = vec![0.0; p + 1];
            let mut x = 0.0;
            for g in &gaps[..gaps.len() - 1] {
                x += g;
                v.push(x);
            }
            x += gaps[gaps.len() - 1];
            v.extend(std::iter::repeat_n(x, p + 1));
            KnotVector::new(v, p).unwrap()
        })
    }

    proptest! {
        #[test]
        fn basis_is_nonnegative_partition_of_unity(kv in knot_vector(), t in 0.0f64..=1.0) {
            let x = kv.first() + t * (kv.last() - kv.first());
            let dense = kv.dense_values(x).unwrap();
            prop_assert!(dense.iter().all(|&n| n >= -1e-14));
            prop_assert!((dense.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let b = kv.basis_functions(x, 1).unwrap();
            let dsum: f64 = b.ders[1].iter().sum();
            let scale: f64 = b.ders[1].iter().map(|d| d.abs()).sum();
            prop_assert!(dsum.abs() <= 1e-12 * (1.0 + scale));
        }
    }
}
