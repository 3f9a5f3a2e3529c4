//! Banded LU with partial pivoting on a reverse Cuthill-McKee ordering.

use std::collections::VecDeque;

use super::SolverError;
use crate::fem::CsrMatrix;

/// Symmetric permutation that narrows the band of a sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BandOrdering {
    /// New index -> original index.
    pub perm: Vec<usize>,
    /// Original index -> new index.
    pub inv: Vec<usize>,
    /// Half bandwidth after permutation.
    pub bandwidth: usize,
}

fn bandwidth_of(a: &CsrMatrix, inv: &[usize]) -> usize {
    let mut b = 0;
    for r in 0..a.n {
        for k in a.row_ptr[r]..a.row_ptr[r + 1] {
            b = b.max(inv[r].abs_diff(inv[a.col_idx[k]]));
        }
    }
    b
}

fn neighbours(a: &CsrMatrix, r: usize) -> impl Iterator<Item = usize> + '_ {
    a.col_idx[a.row_ptr[r]..a.row_ptr[r + 1]].iter().copied().filter(move |&c| c != r)
}

/// Breadth-first level structure from `root` restricted to unvisited nodes.
fn levels(a: &CsrMatrix, root: usize, visited: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = visited.to_vec();
    seen[root] = true;
    let mut out = vec![vec![root]];
    loop {
        let mut next = Vec::new();
        for &v in out.last().unwrap() {
            for w in neighbours(a, v) {
                if !seen[w] {
                    seen[w] = true;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return out;
        }
        out.push(next);
    }
}

impl BandOrdering {
    pub fn identity(a: &CsrMatrix) -> Self {
        let perm: Vec<usize> = (0..a.n).collect();
        let bandwidth = bandwidth_of(a, &perm);
        Self { inv: perm.clone(), perm, bandwidth }
    }

    /// Reverse Cuthill-McKee from a pseudo-peripheral node of each connected
    /// component. The pattern is assumed structurally symmetric.
    pub fn rcm(a: &CsrMatrix) -> Self {
        let n = a.n;
        let degree: Vec<usize> = (0..n).map(|r| neighbours(a, r).count()).collect();
        let mut visited = vec![false; n];
        let mut order = Vec::with_capacity(n);
        while order.len() < n {
            let mut root = (0..n).filter(|&v| !visited[v]).min_by_key(|&v| (degree[v], v)).unwrap();
            let mut depth = levels(a, root, &visited).len();
            for _ in 0..8 {
                let ls = levels(a, root, &visited);
                let cand = *ls.last().unwrap().iter().min_by_key(|&&v| (degree[v], v)).unwrap();
                let d = levels(a, cand, &visited).len();
                if d <= depth {
                    break;
                }
                root = cand;
                depth = d;
            }
            let start = order.len();
            visited[root] = true;
            let mut queue = VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                let mut nb: Vec<usize> = neighbours(a, v).filter(|&w| !visited[w]).collect();
                nb.sort_unstable_by_key(|&w| (degree[w], w));
                for w in nb {
                    visited[w] = true;
                    queue.push_back(w);
                }
            }
            order[start..].reverse();
        }
        Self::from_order(a, order)
    }

    /// Ordering that eliminates unknown `order[0]` first.
    pub fn from_order(a: &CsrMatrix, order: Vec<usize>) -> Self {
        assert_eq!(order.len(), a.n, "ordering must list every unknown once");
        let mut inv = vec![usize::MAX; a.n];
        for (i, &p) in order.iter().enumerate() {
            inv[p] = i;
        }
        assert!(inv.iter().all(|&i| i != usize::MAX), "ordering must list every unknown once");
        let bandwidth = bandwidth_of(a, &inv);
        Self { perm: order, inv, bandwidth }
    }

    /// Reverse Cuthill-McKee or one of the `candidates`, whichever has the
    /// smallest bandwidth (ties keep the earlier one).
    pub fn best(a: &CsrMatrix, candidates: Vec<Vec<usize>>) -> Self {
        let mut best = Self::rcm(a);
        for c in candidates {
            let o = Self::from_order(a, c);
            if o.bandwidth < best.bandwidth {
                best = o;
            }
        }
        best
    }
}

/// LU factors of a permuted band matrix (row interchanges within the band).
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    b: usize,
    w: usize,
    /// Row `i` holds columns `i-b ..= i+2b` at offset `j + b - i`.
    data: Vec<f64>,
    pivots: Vec<usize>,
    /// Multipliers of column `k` for rows `k+1 ..= k+b`.
    lower: Vec<f64>,
    perm: Vec<usize>,
    inv: Vec<usize>,
}

impl BandedLu {
    pub fn factor(a: &CsrMatrix, ord: &BandOrdering) -> Result<Self, SolverError> {
        let n = a.n;
        let b = ord.bandwidth;
        let w = 3 * b + 1;
        let mut data = vec![0.0; n * w];
        let mut amax: f64 = 0.0;
        for r in 0..n {
            let i = ord.inv[r];
            for k in a.row_ptr[r]..a.row_ptr[r + 1] {
                let j = ord.inv[a.col_idx[k]];
                data[i * w + j + b - i] += a.values[k];
                amax = amax.max(a.values[k].abs());
            }
        }
        let tiny = f64::EPSILON * amax * (b as f64 + 1.0);
        let mut pivots = vec![0; n];
        let mut lower = vec![0.0; n * b];
        // last column that may hold a nonzero, per row; grows only through
        // row interchanges, so without pivoting the update stays within `b`
        let mut reach: Vec<usize> = (0..n).map(|i| (i + b).min(n - 1)).collect();
        for k in 0..n {
            let last = (k + b).min(n - 1);
            let mut p = k;
            let mut best = data[k * w + b].abs();
            for i in k + 1..=last {
                let v = data[i * w + k + b - i].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > tiny) {
                return Err(SolverError::Singular(ord.perm[k]));
            }
            pivots[k] = p;
            if p != k {
                let right = reach[k].max(reach[p]);
                for j in k..=right {
                    data.swap(k * w + j + b - k, p * w + j + b - p);
                }
                reach.swap(k, p);
            }
            let right = reach[k];
            let (head, tail) = data.split_at_mut((k + 1) * w);
            let row_k = &head[k * w + b..k * w + b + (right - k) + 1];
            let pivot = row_k[0];
            for i in k + 1..=last {
                let row_i = &mut tail[(i - k - 1) * w..(i - k) * w];
                let l = row_i[k + b - i] / pivot;
                row_i[k + b - i] = 0.0;
                lower[k * b + (i - k - 1)] = l;
                if l != 0.0 {
                    let dst = &mut row_i[k + 1 + b - i..=right + b - i];
                    for (d, &s) in dst.iter_mut().zip(&row_k[1..]) {
                        *d -= l * s;
                    }
                    reach[i] = reach[i].max(right);
                }
            }
        }
        Ok(Self { n, b, w, data, pivots, lower, perm: ord.perm.clone(), inv: ord.inv.clone() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let (n, b, w) = (self.n, self.b, self.w);
        let mut y: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for k in 0..n {
            y.swap(k, self.pivots[k]);
            let yk = y[k];
            if yk != 0.0 {
                for i in k + 1..=(k + b).min(n.saturating_sub(1)) {
                    y[i] -= self.lower[k * b + (i - k - 1)] * yk;
                }
            }
        }
        for k in (0..n).rev() {
            let right = (k + 2 * b).min(n - 1);
            let row = &self.data[k * w + b..k * w + b + (right - k) + 1];
            let s: f64 = row[1..].iter().zip(&y[k + 1..=right]).map(|(u, v)| u * v).sum();
            y[k] = (y[k] - s) / row[0];
        }
        self.inv.iter().map(|&i| y[i]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn from_dense(m: &DMatrix<f64>) -> CsrMatrix {
        let n = m.nrows();
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for r in 0..n {
            for c in 0..n {
                if m[(r, c)] != 0.0 || m[(c, r)] != 0.0 {
                    col_idx.push(c);
                    values.push(m[(r, c)]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix { n, row_ptr, col_idx, values }
    }

    /// Scrambled 2D grid Laplacian plus an unsymmetric perturbation.
    fn grid(nx: usize, ny: usize) -> DMatrix<f64> {
        let n = nx * ny;
        let shuffle: Vec<usize> = (0..n).map(|i| (i * 7919) % n).collect();
        let mut m = DMatrix::zeros(n, n);
        for y in 0..ny {
            for x in 0..nx {
                let i = shuffle[y * nx + x];
                m[(i, i)] = 4.5;
                let mut link = |j: usize, v: f64| m[(i, j)] = v;
                if x > 0 {
                    link(shuffle[y * nx + x - 1], -1.0);
                }
                if x + 1 < nx {
                    link(shuffle[y * nx + x + 1], -0.8);
                }
                if y > 0 {
                    link(shuffle[(y - 1) * nx + x], -1.1);
                }
                if y + 1 < ny {
                    link(shuffle[(y + 1) * nx + x], -0.9);
                }
            }
        }
        m
    }

    #[test]
    fn rcm_narrows_the_band() {
        let a = from_dense(&grid(20, 6));
        let id = BandOrdering::identity(&a);
        let rcm = BandOrdering::rcm(&a);
        assert!(rcm.bandwidth <= 7, "{}", rcm.bandwidth);
        assert!(rcm.bandwidth < id.bandwidth);
        let mut p = rcm.perm.clone();
        p.sort_unstable();
        assert_eq!(p, (0..120).collect::<Vec<_>>());
    }

    #[test]
    fn matches_dense_solution() {
        let m = grid(15, 5);
        let a = from_dense(&m);
        let rhs: Vec<f64> = (0..75).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let exact = m.clone().lu().solve(&DVector::from_vec(rhs.clone())).unwrap();
        for ord in [BandOrdering::identity(&a), BandOrdering::rcm(&a)] {
            let x = BandedLu::factor(&a, &ord).unwrap().solve(&rhs);
            for i in 0..75 {
                assert!((x[i] - exact[i]).abs() < 1e-12 * exact.amax());
            }
        }
    }

    #[test]
    fn pivots_through_zero_diagonal() {
        let m = DMatrix::from_row_slice(3, 3, &[0.0, 2.0, 0.0, 1.0, 0.0, 3.0, 0.0, 4.0, 5.0]);
        let a = from_dense(&m);
        let x = BandedLu::factor(&a, &BandOrdering::identity(&a)).unwrap().solve(&[2.0, 4.0, 9.0]);
        let r = &m * DVector::from_vec(x) - DVector::from_vec(vec![2.0, 4.0, 9.0]);
        assert!(r.amax() < 1e-14);
    }

    #[test]
    fn detects_singularity() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let a = from_dense(&m);
        assert!(matches!(BandedLu::factor(&a, &BandOrdering::identity(&a)), Err(SolverError::Singular(_))));
    }
}
