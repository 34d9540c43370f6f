//! Seeded random instances. A `(seed, trial)` pair fully determines the
//! generator, so parallel and serial runs see identical inputs.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::embeddings::OperatorPair;
use crate::numkernel::CMatrix;
use crate::spaces::{FourSpaces, Index};

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Complex Gaussian matrix with independent standard-normal real and
/// imaginary parts.
pub fn gaussian_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let data = (0..n * n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    CMatrix::new(n, n, data).expect("n*n entries")
}

/// `(G + G^*)/2` scaled to spectral norm 1.
pub fn random_self_adjoint<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = gaussian_matrix(n, rng);
    let h = g
        .add(&g.conj_transpose())
        .expect("same shape")
        .scale(Complex64::new(0.5, 0.0));
    let norm = h.spectral_norm();
    if norm == 0.0 {
        return h;
    }
    h.scale(Complex64::new(1.0 / norm, 0.0))
}

/// Gaussian matrix scaled to spectral norm 1 (not self-adjoint).
pub fn random_contraction<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = gaussian_matrix(n, rng);
    let norm = g.spectral_norm();
    if norm == 0.0 {
        return g;
    }
    g.scale(Complex64::new(1.0 / norm, 0.0))
}

/// Self-adjoint `(T, S)` of spectral norm 1 on `(H_ι, K_ι)`.
pub fn random_pair<R: Rng + ?Sized>(index: Index, spaces: &FourSpaces, rng: &mut R) -> OperatorPair {
    let t = random_self_adjoint(spaces.h(index).dim(), rng);
    let s = random_self_adjoint(spaces.k(index).dim(), rng);
    OperatorPair { index, t, s }
}
