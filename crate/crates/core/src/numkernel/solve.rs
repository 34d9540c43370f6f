use num_complex::Complex64;

use super::{inner_unchecked, CVector, LinearOp, ZERO};
use crate::error::{Error, Result};

/// Systems up to this size are factorized densely; larger ones go to GMRES.
pub const DENSE_SOLVE_LIMIT: usize = 600;

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Relative residual target `‖b − Ax‖ ≤ rtol ‖b‖` for the iterative path.
    pub rtol: f64,
    pub restart: usize,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            rtol: 1e-15,
            restart: 60,
            max_iterations: 3000,
        }
    }
}

/// Solves `A x = b`.
pub fn solve(op: &dyn LinearOp, b: &[Complex64], opts: SolveOptions) -> Result<CVector> {
    let n = op.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            context: "linear solve right-hand side",
            expected: n,
            found: b.len(),
        });
    }
    if n <= DENSE_SOLVE_LIMIT {
        return op.to_dense().solve(b);
    }
    gmres(op, b, opts)
}

fn gmres(op: &dyn LinearOp, b: &[Complex64], opts: SolveOptions) -> Result<CVector> {
    let n = op.dim();
    let b_norm = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut x = CVector::zeros(n);
    if b_norm == 0.0 {
        return Ok(x);
    }
    let target = opts.rtol * b_norm;
    // Stagnation floor: rounding in the matvecs limits what restarts can reach.
    let floor = 64.0 * f64::EPSILON * b_norm;
    let m = opts.restart.max(1);
    let mut r = CVector::new(b.to_vec());
    let mut beta = b_norm;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        let mut basis: Vec<CVector> = Vec::with_capacity(m + 1);
        basis.push(r.scale(Complex64::new(1.0 / beta, 0.0)));
        let mut hess: Vec<Vec<Complex64>> = Vec::with_capacity(m);
        let mut cs: Vec<f64> = Vec::with_capacity(m);
        let mut sn: Vec<Complex64> = Vec::with_capacity(m);
        let mut g = vec![ZERO; m + 1];
        g[0] = Complex64::new(beta, 0.0);

        let mut steps = 0;
        for j in 0..m {
            iterations += 1;
            let mut w = op.apply(&basis[j]);
            let mut h = vec![ZERO; j + 2];
            // Two passes of modified Gram-Schmidt.
            for _ in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let coeff = inner_unchecked(&w, v);
                    h[i] += coeff;
                    w.axpy(-coeff, v);
                }
            }
            let w_norm = w.norm();
            h[j + 1] = Complex64::new(w_norm, 0.0);
            for i in 0..j {
                let (a, bb) = (h[i], h[i + 1]);
                h[i] = cs[i] * a + sn[i] * bb;
                h[i + 1] = -sn[i].conj() * a + cs[i] * bb;
            }
            let (c, s) = givens(h[j], h[j + 1]);
            h[j] = c * h[j] + s * h[j + 1];
            h[j + 1] = ZERO;
            cs.push(c);
            sn.push(s);
            g[j + 1] = -s.conj() * g[j];
            g[j] = c * g[j];
            hess.push(h);
            steps = j + 1;
            if g[j + 1].norm() <= target || w_norm == 0.0 || iterations >= opts.max_iterations {
                break;
            }
            basis.push(w.scale(Complex64::new(1.0 / w_norm, 0.0)));
        }

        let mut y = vec![ZERO; steps];
        for i in (0..steps).rev() {
            let mut s = g[i];
            for k in i + 1..steps {
                s -= hess[k][i] * y[k];
            }
            y[i] = s / hess[i][i];
        }
        for (k, yk) in y.iter().enumerate() {
            x.axpy(*yk, &basis[k]);
        }
        let ax = op.apply(&x);
        r = CVector::new(b.iter().zip(ax.iter()).map(|(bi, ai)| bi - ai).collect());
        let new_beta = r.norm();
        if new_beta <= target.max(floor) {
            return Ok(x);
        }
        if new_beta >= beta * (1.0 - 1e-3) {
            return Err(Error::NonConvergence {
                iterations,
                residual: new_beta / b_norm,
            });
        }
        beta = new_beta;
    }
    Err(Error::NonConvergence {
        iterations,
        residual: beta / b_norm,
    })
}

fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let (na, nb) = (a.norm(), b.norm());
    if nb == 0.0 {
        return (1.0, ZERO);
    }
    if na == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let r = na.hypot(nb);
    (na / r, (a / na) * b.conj() / r)
}
