use num_complex::Complex64;

use super::{CMatrix, CVector, SparseMatrix, ZERO};

/// A square linear map that can act on vectors.
pub trait LinearOp: Sync {
    fn dim(&self) -> usize;

    fn apply(&self, x: &[Complex64]) -> CVector;

    fn to_dense(&self) -> CMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        for j in 0..n {
            let col = self.apply(&CVector::basis(n, j));
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }
}

impl LinearOp for CMatrix {
    fn dim(&self) -> usize {
        assert!(self.is_square(), "LinearOp requires a square matrix");
        self.rows()
    }

    fn apply(&self, x: &[Complex64]) -> CVector {
        CMatrix::apply(self, x).expect("dimension checked by caller")
    }

    fn to_dense(&self) -> CMatrix {
        self.clone()
    }
}

impl LinearOp for SparseMatrix {
    fn dim(&self) -> usize {
        assert_eq!(self.n_rows(), self.n_cols(), "LinearOp requires a square matrix");
        self.n_rows()
    }

    fn apply(&self, x: &[Complex64]) -> CVector {
        SparseMatrix::apply(self, x)
    }

    fn to_dense(&self) -> CMatrix {
        SparseMatrix::to_dense(self)
    }
}

/// `identity_coeff * I + Σ coeff_k * (A_k1 A_k2 ⋯)`, applied lazily.
///
/// Each product is listed left to right and applied right to left.
pub struct ScaledSum<'a> {
    dim: usize,
    identity_coeff: Complex64,
    terms: Vec<(Complex64, Vec<&'a dyn LinearOp>)>,
}

impl<'a> ScaledSum<'a> {
    pub fn new(dim: usize, identity_coeff: Complex64) -> Self {
        ScaledSum {
            dim,
            identity_coeff,
            terms: Vec::new(),
        }
    }

    pub fn term(mut self, coeff: Complex64, factors: Vec<&'a dyn LinearOp>) -> Self {
        debug_assert!(factors.iter().all(|f| f.dim() == self.dim));
        self.terms.push((coeff, factors));
        self
    }
}

impl LinearOp for ScaledSum<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[Complex64]) -> CVector {
        let mut out = CVector::new(x.iter().map(|v| v * self.identity_coeff).collect());
        for (coeff, factors) in &self.terms {
            if *coeff == ZERO {
                continue;
            }
            let mut v = CVector::new(x.to_vec());
            for f in factors.iter().rev() {
                v = f.apply(&v);
            }
            out.axpy(*coeff, &v);
        }
        out
    }
}
