/// Compressed sparse row matrix with a fixed pattern (sorted columns).
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Pattern covering every pair of unknowns sharing an element.
    pub fn from_element_dofs<'a, I>(n: usize, elements: I) -> Self
    where
        I: IntoIterator<Item = &'a [usize]>,
    {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for dofs in elements {
            for &r in dofs {
                rows[r].extend_from_slice(dofs);
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for r in rows.iter_mut() {
            r.sort_unstable();
            r.dedup();
            col_idx.extend_from_slice(r);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        Self { n, row_ptr, col_idx, values: vec![0.0; nnz] }
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn clear(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn position(&self, row: usize, col: usize) -> Option<usize> {
        let (a, b) = (self.row_ptr[row], self.row_ptr[row + 1]);
        self.col_idx[a..b].binary_search(&col).ok().map(|k| a + k)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.position(row, col).map_or(0.0, |k| self.values[k])
    }

    /// Adds a dense row-major block `m` (size `dofs.len()^2`).
    pub fn add_block(&mut self, dofs: &[usize], m: &[f64]) {
        let nd = dofs.len();
        for (i, &r) in dofs.iter().enumerate() {
            let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let cols = &self.col_idx[a..b];
            for (j, &c) in dofs.iter().enumerate() {
                let v = m[i * nd + j];
                if v != 0.0 {
                    let k = cols.binary_search(&c).expect("entry outside sparsity pattern");
                    self.values[a + k] += v;
                }
            }
        }
    }

    /// Entrywise mean with a matrix of the same pattern; `None` otherwise.
    pub fn average(&self, other: &CsrMatrix) -> Option<CsrMatrix> {
        if self.n != other.n || self.row_ptr != other.row_ptr || self.col_idx != other.col_idx {
            return None;
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| 0.5 * (a + b)).collect();
        Some(CsrMatrix { values, ..self.clone() })
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1]).map(|k| self.values[k] * x[self.col_idx[k]]).sum()
            })
            .collect()
    }

    pub fn mul_vec_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for r in 0..self.n {
            if x[r] != 0.0 {
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    y[self.col_idx[k]] += self.values[k] * x[r];
                }
            }
        }
        y
    }

    /// Submatrix on the given rows and columns (`map[i]` = new index or
    /// `usize::MAX` when dropped; same map for rows and columns).
    pub fn restrict(&self, map: &[usize], n_new: usize) -> CsrMatrix {
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut order: Vec<usize> = vec![usize::MAX; n_new];
        for (old, &new) in map.iter().enumerate() {
            if new != usize::MAX {
                order[new] = old;
            }
        }
        for &old in &order {
            let mut row: Vec<(usize, f64)> = (self.row_ptr[old]..self.row_ptr[old + 1])
                .filter_map(|k| {
                    let c = map[self.col_idx[k]];
                    (c != usize::MAX).then_some((c, self.values[k]))
                })
                .collect();
            row.sort_unstable_by_key(|e| e.0);
            for (c, v) in row {
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix { n: n_new, row_ptr, col_idx, values }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.col_idx[k])] += self.values[k];
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_diagonal_for_disconnected_elements() {
        let e1 = [0usize, 1];
        let e2 = [2usize, 3];
        let mut k = CsrMatrix::from_element_dofs(4, [&e1[..], &e2[..]]);
        k.add_block(&e1, &[1.0, -1.0, -1.0, 1.0]);
        k.add_block(&e2, &[2.0, -2.0, -2.0, 2.0]);
        let d = k.to_dense();
        assert_eq!(d[(0, 2)], 0.0);
        assert_eq!(d[(1, 3)], 0.0);
        assert_eq!(k.nnz(), 8);
        assert_eq!(k.mul_vec(&[1.0, 0.0, 0.0, 1.0]), vec![1.0, -1.0, -2.0, 2.0]);
        let sub = k.restrict(&[usize::MAX, 0, 1, usize::MAX], 2);
        assert_eq!(sub.to_dense(), nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]));
    }
}
