use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{CMatrix, CVector, ZERO};

/// Compressed sparse column storage. Row indices within a column are sorted
/// and unique; explicit zeros are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseMatrix {
    /// Builds from per-column `(row, value)` lists; duplicate rows are summed.
    pub fn from_columns(n_rows: usize, columns: Vec<Vec<(usize, Complex64)>>) -> Self {
        let n_cols = columns.len();
        let mut col_ptr = Vec::with_capacity(n_cols + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for mut col in columns {
            col.sort_by_key(|&(r, _)| r);
            let mut iter = col.into_iter().peekable();
            while let Some((r, mut v)) = iter.next() {
                debug_assert!(r < n_rows);
                while let Some(&(r2, v2)) = iter.peek() {
                    if r2 != r {
                        break;
                    }
                    v += v2;
                    iter.next();
                }
                if v != ZERO {
                    row_idx.push(r);
                    values.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        SparseMatrix {
            n_rows,
            n_cols,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_columns(n, (0..n).map(|j| vec![(j, super::ONE)]).collect())
    }

    pub fn from_dense(m: &CMatrix) -> Self {
        let cols = (0..m.cols())
            .map(|j| {
                (0..m.rows())
                    .filter(|&i| m[(i, j)] != ZERO)
                    .map(|i| (i, m[(i, j)]))
                    .collect()
            })
            .collect();
        Self::from_columns(m.rows(), cols)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Nonzero entries `(row, value)` of column `j`.
    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        self.row_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        match self.row_idx[range.clone()].binary_search(&i) {
            Ok(k) => self.values[range.start + k],
            Err(_) => ZERO,
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> CVector {
        assert_eq!(x.len(), self.n_cols, "sparse apply: dimension mismatch");
        let mut y = vec![ZERO; self.n_rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == ZERO {
                continue;
            }
            for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                y[self.row_idx[k]] += self.values[k] * xj;
            }
        }
        CVector::new(y)
    }

    /// `A* x`.
    pub fn apply_adjoint(&self, x: &[Complex64]) -> CVector {
        assert_eq!(x.len(), self.n_rows, "sparse adjoint apply: dimension mismatch");
        let y = (0..self.n_cols)
            .map(|j| {
                (self.col_ptr[j]..self.col_ptr[j + 1])
                    .map(|k| self.values[k].conj() * x[self.row_idx[k]])
                    .sum()
            })
            .collect();
        CVector::new(y)
    }

    pub fn conj_transpose(&self) -> SparseMatrix {
        let mut cols: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); self.n_rows];
        for j in 0..self.n_cols {
            for (i, v) in self.column(j) {
                cols[i].push((j, v.conj()));
            }
        }
        Self::from_columns(self.n_cols, cols)
    }

    pub fn scale(&self, c: Complex64) -> SparseMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        if c == ZERO {
            return Self::from_columns(self.n_rows, vec![Vec::new(); self.n_cols]);
        }
        out
    }

    pub fn add(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        let cols = (0..self.n_cols)
            .map(|j| self.column(j).chain(other.column(j)).collect())
            .collect();
        Self::from_columns(self.n_rows, cols)
    }

    /// `self * other`, column by column.
    pub fn matmul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.n_cols, other.n_rows);
        let cols = (0..other.n_cols)
            .map(|j| {
                let mut acc: Vec<(usize, Complex64)> = Vec::new();
                for (k, b) in other.column(j) {
                    acc.extend(self.column(k).map(|(i, a)| (i, a * b)));
                }
                acc
            })
            .collect();
        Self::from_columns(self.n_rows, cols)
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.n_rows, self.n_cols);
        for j in 0..self.n_cols {
            for (i, v) in self.column(j) {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise difference, restricted to the columns selected by `keep`.
    pub fn max_abs_diff_on_columns(
        &self,
        other: &SparseMatrix,
        mut keep: impl FnMut(usize) -> bool,
    ) -> f64 {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        let mut worst: f64 = 0.0;
        for j in (0..self.n_cols).filter(|&j| keep(j)) {
            let mut merged: BTreeMap<usize, Complex64> = BTreeMap::new();
            for (i, v) in self.column(j) {
                *merged.entry(i).or_insert(ZERO) += v;
            }
            for (i, v) in other.column(j) {
                *merged.entry(i).or_insert(ZERO) -= v;
            }
            worst = merged.values().map(|d| d.norm()).fold(worst, f64::max);
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &SparseMatrix) -> f64 {
        self.max_abs_diff_on_columns(other, |_| true)
    }

    /// Power iteration on `A* A`. Returns a lower bound on the spectral norm
    /// that converges to it; used where a dense singular value decomposition
    /// would be too large.
    pub fn spectral_norm_estimate(&self, iterations: usize) -> f64 {
        let n = self.n_cols;
        if n == 0 || self.nnz() == 0 {
            return 0.0;
        }
        // Deterministic, non-degenerate start vector.
        let mut v = CVector::new(
            (0..n)
                .map(|i| Complex64::new(1.0 + (i % 7) as f64 * 0.1, (i % 3) as f64 * 0.05))
                .collect(),
        );
        let mut estimate = 0.0;
        for _ in 0..iterations {
            let nv = v.norm();
            if nv == 0.0 {
                return estimate;
            }
            v = v.scale(Complex64::new(1.0 / nv, 0.0));
            let av = self.apply(&v);
            let next = av.norm();
            v = self.apply_adjoint(&av);
            if (next - estimate).abs() <= 1e-13 * next {
                return next;
            }
            estimate = next;
        }
        estimate
    }
}
