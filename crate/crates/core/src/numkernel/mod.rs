//! Dense complex linear algebra for small matrices, plus the sparse column
//! storage and iterative solver used on large truncated product spaces.
//!
//! Inner products are linear in the first argument and conjugate-linear in the
//! second, so a vector state reads `inner(&a.apply(v), v)`.

pub mod json;
mod linop;
mod sparse;
mod solve;

use std::ops::{Deref, DerefMut, Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use linop::{LinearOp, ScaledSum};
pub use solve::{solve, SolveOptions, DENSE_SOLVE_LIMIT};
pub use sparse::SparseMatrix;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Relative pivot threshold below which a matrix is treated as singular.
pub const SINGULAR_PIVOT_RTOL: f64 = 1e-12;

/// A column vector of complex amplitudes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CVector(Vec<Complex64>);

impl CVector {
    pub fn new(entries: Vec<Complex64>) -> Self {
        CVector(entries)
    }

    pub fn zeros(n: usize) -> Self {
        CVector(vec![ZERO; n])
    }

    /// The canonical basis vector `e_i` of length `n`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = ONE;
        v
    }

    pub fn from_real(entries: &[f64]) -> Self {
        CVector(entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: Complex64) -> CVector {
        CVector(self.0.iter().map(|z| z * c).collect())
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: Complex64, other: &CVector) {
        debug_assert_eq!(self.len(), other.len());
        for (y, x) in self.0.iter_mut().zip(&other.0) {
            *y += c * x;
        }
    }

    pub fn sub(&self, other: &CVector) -> CVector {
        CVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &CVector) -> CVector {
        CVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Deref for CVector {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl DerefMut for CVector {
    fn deref_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }
}

impl From<Vec<Complex64>> for CVector {
    fn from(v: Vec<Complex64>) -> Self {
        CVector(v)
    }
}

/// `<x, y>`, linear in `x` and conjugate-linear in `y`.
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Result<Complex64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "inner product",
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(inner_unchecked(x, y))
}

#[inline]
pub(crate) fn inner_unchecked(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

/// A dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Precondition("matrix dimensions must be positive".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "matrix entry count",
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::DimensionMismatch {
                context: "ragged matrix rows",
                expected: c,
                found: bad.len(),
            });
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|&x| Complex64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in entries.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    pub fn scalar(c: Complex64) -> Self {
        CMatrix {
            rows: 1,
            cols: 1,
            data: vec![c],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> CVector {
        CVector((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn conj_transpose(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn add(&self, other: &CMatrix) -> Result<CMatrix> {
        self.check_same_shape(other, "matrix sum")?;
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix> {
        self.check_same_shape(other, "matrix difference")?;
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    /// `self - c * I`.
    pub fn shift(&self, c: Complex64) -> CMatrix {
        let mut out = self.clone();
        for i in 0..self.rows.min(self.cols) {
            out.data[i * self.cols + i] -= c;
        }
        out
    }

    fn check_same_shape(&self, other: &CMatrix, context: &'static str) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(())
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: "matrix product",
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<CVector> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch {
                context: "matrix-vector product",
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok(CVector(
            (0..self.rows)
                .map(|i| inner_bilinear(self.row(i), v))
                .collect(),
        ))
    }

    /// Block-diagonal sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &CMatrix) -> CMatrix {
        let rows = self.rows + other.rows;
        let cols = self.cols + other.cols;
        let mut out = CMatrix::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[i * cols + j] = self[(i, j)];
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out.data[(self.rows + i) * cols + self.cols + j] = other[(i, j)];
            }
        }
        out
    }

    /// Kronecker product with the row-major convention `(i1, i2) -> i1 * n2 + i2`.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = CMatrix::zeros(rows, cols);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = self[(i1, j1)];
                if a == ZERO {
                    continue;
                }
                for i2 in 0..other.rows {
                    for j2 in 0..other.cols {
                        out.data[(i1 * other.rows + i2) * cols + j1 * other.cols + j2] =
                            a * other[(i2, j2)];
                    }
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        let m = nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data);
        m.singular_values().iter().copied().fold(0.0, f64::max)
    }

    /// Partial-pivot LU factorization `P A = L U`, stored compactly.
    fn lu(&self) -> Result<Lu> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                context: "inverse of non-square matrix",
                expected: self.rows,
                found: self.cols,
            });
        }
        let n = self.rows;
        let threshold = SINGULAR_PIVOT_RTOL * self.frobenius_norm();
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot_mag) = (k..n)
                .map(|i| (i, a[i * n + k].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_mag == 0.0 || pivot_mag < threshold {
                return Err(Error::Singular {
                    pivot: pivot_mag,
                    column: k,
                });
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = a[k * n + k];
            for i in k + 1..n {
                let factor = a[i * n + k] / pivot;
                a[i * n + k] = factor;
                if factor == ZERO {
                    continue;
                }
                for j in k + 1..n {
                    let u = a[k * n + j];
                    a[i * n + j] -= factor * u;
                }
            }
        }
        Ok(Lu { n, a, perm })
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        let lu = self.lu()?;
        let n = self.rows;
        let mut out = CMatrix::zeros(n, n);
        for j in 0..n {
            let col = lu.solve(&CVector::basis(n, j));
            for i in 0..n {
                out.data[i * n + j] = col[i];
            }
        }
        Ok(out)
    }

    /// Solves `self x = b` by the same factorization `inverse` uses.
    pub fn solve(&self, b: &[Complex64]) -> Result<CVector> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch {
                context: "linear solve right-hand side",
                expected: self.rows,
                found: b.len(),
            });
        }
        Ok(self.lu()?.solve(b))
    }
}

#[inline]
fn inner_bilinear(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

struct Lu {
    n: usize,
    a: Vec<Complex64>,
    perm: Vec<usize>,
}

impl Lu {
    fn solve(&self, b: &[Complex64]) -> CVector {
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.a[i * n..i * n + i];
            let s = row.iter().zip(&x[..i]).map(|(a, y)| a * y).sum::<Complex64>();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.a[i * n + i + 1..(i + 1) * n];
            let s = x[i] - row.iter().zip(&x[i + 1..]).map(|(a, y)| a * y).sum::<Complex64>();
            x[i] = s / self.a[i * n + i];
        }
        CVector(x)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn flip() -> CMatrix {
        CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    #[test]
    fn inner_product_examples() {
        let e0 = CVector::basis(2, 0);
        let e1 = CVector::basis(2, 1);
        assert_eq!(inner(&e0, &e0).unwrap(), ONE);
        assert_eq!(inner(&e0, &e1).unwrap(), ZERO);
        let x = CVector::new(vec![c(1.0, 1.0), ZERO]);
        let y = CVector::new(vec![c(0.0, 1.0), ZERO]);
        assert_eq!(inner(&x, &y).unwrap(), c(1.0, -1.0));
        assert!(matches!(
            inner(&x, &CVector::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn inverse_examples() {
        let id = CMatrix::identity(3);
        assert!(id.inverse().unwrap().max_abs_diff(&id) < 1e-15);

        let d = CMatrix::diag(&[c(2.0, 0.0), c(4.0, 0.0)]);
        let expected = CMatrix::diag(&[c(0.5, 0.0), c(0.25, 0.0)]);
        assert!(d.inverse().unwrap().max_abs_diff(&expected) < 1e-15);

        let m = CMatrix::identity(2).sub(&flip().scale(c(0.1, 0.0))).unwrap();
        let expected = CMatrix::from_real_rows(&[&[1.0, 0.1], &[0.1, 1.0]])
            .unwrap()
            .scale(c(1.0 / 0.99, 0.0));
        assert!(m.inverse().unwrap().max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let m = CMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(matches!(m.inverse(), Err(Error::Singular { .. })));
        assert!(matches!(
            CMatrix::zeros(2, 2).inverse(),
            Err(Error::Singular { .. })
        ));
        let rect = CMatrix::zeros(2, 3);
        assert!(matches!(
            rect.inverse(),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn spectral_norm_examples() {
        assert!((CMatrix::identity(4).spectral_norm() - 1.0).abs() < 1e-14);
        assert!((flip().spectral_norm() - 1.0).abs() < 1e-14);
        let d = CMatrix::diag(&[c(3.0, 0.0), c(-5.0, 0.0)]);
        assert!((d.spectral_norm() - 5.0).abs() < 1e-13);
    }

    #[test]
    fn products() {
        let m = CMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        assert_eq!(CMatrix::identity(2).matmul(&m).unwrap(), m);
        let v = CVector::new(vec![c(1.0, 2.0), c(-1.0, 0.5)]);
        assert_eq!(CMatrix::identity(2).apply(&v).unwrap(), v);
        assert_eq!(flip().matmul(&flip()).unwrap(), CMatrix::identity(2));
        assert!(m.matmul(&CMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn kron_and_direct_sum_shapes() {
        let a = CMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let k = a.kron(&CMatrix::identity(2));
        assert_eq!(k.rows(), 4);
        assert_eq!(k[(2, 0)], c(3.0, 0.0));
        assert_eq!(k[(3, 1)], c(3.0, 0.0));
        assert_eq!(k[(3, 0)], ZERO);
        let s = a.direct_sum(&a);
        assert_eq!(s[(3, 2)], c(3.0, 0.0));
        assert_eq!(s[(0, 2)], ZERO);
    }

    #[test]
    fn new_rejects_bad_shapes() {
        assert!(CMatrix::new(2, 2, vec![ZERO; 3]).is_err());
        assert!(CMatrix::new(0, 2, vec![]).is_err());
        assert!(CMatrix::from_rows(vec![vec![ONE, ONE], vec![ONE]]).is_err());
    }
}
