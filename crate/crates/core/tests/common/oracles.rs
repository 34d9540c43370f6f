//! Reference computations kept independent of the library's series engine:
//! plain coefficient vectors and classical formulas.

use num_complex::Complex64;

type C = Complex64;

fn zero() -> C {
    C::new(0.0, 0.0)
}

fn one() -> C {
    C::new(1.0, 0.0)
}

/// Product of two coefficient vectors truncated to `len` terms.
fn mul(a: &[C], b: &[C], len: usize) -> Vec<C> {
    let mut out = vec![zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Lagrange inversion: for `k(t) = t·h(t)` with `h(0) = 1`,
/// `[z^n] k^{-1}(z) = (1/n) [t^{n-1}] h(t)^{-n}`.
///
/// `h` holds `h_0 = 1, h_1, …`; returns the coefficients of `z^1 … z^order`.
pub fn lagrange_inverse(h: &[C], order: usize) -> Vec<C> {
    // 1/h by long division.
    let mut inv = vec![zero(); order];
    inv[0] = one() / h[0];
    for n in 1..order {
        let mut s = zero();
        for k in 1..=n.min(h.len() - 1) {
            s += h[k] * inv[n - k];
        }
        inv[n] = -s * inv[0];
    }
    let mut power = vec![one()];
    power.resize(order, zero());
    (1..=order)
        .map(|n| {
            power = mul(&power, &inv, order);
            power[n - 1] / n as f64
        })
        .collect()
}

/// Free cumulants from moments `m_1 … m_N` by the recursion
/// `m_n = Σ_{s=1}^{n} κ_s Σ_{i_1+…+i_s = n−s} m_{i_1} ⋯ m_{i_s}` with `m_0 = 1`.
pub fn free_cumulants(moments: &[C]) -> Vec<C> {
    let n_max = moments.len();
    let mut m = vec![one()];
    m.extend_from_slice(moments);
    // powers[s][j] = [x^j] M(x)^s with M(x) = Σ m_i x^i.
    let mut powers: Vec<Vec<C>> = vec![{
        let mut p = vec![zero(); n_max + 1];
        p[0] = one();
        p
    }];
    for s in 1..=n_max {
        let next = mul(&powers[s - 1], &m, n_max + 1);
        powers.push(next);
    }
    let mut kappa = vec![zero(); n_max + 1];
    for n in 1..=n_max {
        let mut rest = m[n];
        for s in 1..n {
            rest -= kappa[s] * powers[s][n - s];
        }
        // The s = n term is κ_n · m_0^n = κ_n.
        kappa[n] = rest;
    }
    kappa[1..].to_vec()
}

/// Inverse of `k(t) = t/(1 − t²)` by iterating `w ← z − z·w²` on
/// coefficient vectors; returns `z^1 … z^order`.
pub fn flip_inverse_fixed_point(order: usize) -> Vec<f64> {
    // w[i] is the coefficient of z^i, i = 0..=order.
    let mut w = vec![0.0; order + 1];
    for _ in 0..=order {
        let mut sq = vec![0.0; order + 1];
        for i in 0..=order {
            for j in 0..=order - i {
                sq[i + j] += w[i] * w[j];
            }
        }
        let mut next = vec![0.0; order + 1];
        next[1] = 1.0;
        for i in 0..order {
            next[i + 1] -= sq[i];
        }
        w = next;
    }
    w[1..].to_vec()
}
