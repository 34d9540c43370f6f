//! The Boolean, monotone and orthogonal embeddings, each built literally from
//! its isometries `V`, `V^(0)`, `U` on the corresponding degenerate H-side
//! basis. They share no code with the `Λ` block rules, so comparing the two
//! is a genuine cross-check.

use std::sync::Arc;

use num_complex::Complex64;

use super::{EmbeddedOperator, Provenance};
use crate::error::{Error, Result};
use crate::numkernel::{CMatrix, SparseMatrix, ONE};
use crate::spaces::{BasisSide, BasisWord, Index, Letter, ProductBasis};

fn require(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Precondition(what.to_string()))
    }
}

fn require_square(t: &CMatrix, n: usize, context: &'static str) -> Result<()> {
    if t.is_square() && t.rows() == n {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected: n,
            found: t.rows(),
        })
    }
}

/// Dense isometry with `image(w)` giving the target coordinate of each basis
/// word, or `None` for words sent to zero.
fn isometry(
    basis: &ProductBasis,
    target_dim: usize,
    image: impl Fn(&BasisWord) -> Option<usize>,
) -> CMatrix {
    let mut v = CMatrix::zeros(target_dim, basis.len());
    for (j, w) in basis.words().iter().enumerate() {
        if let Some(i) = image(w) {
            v[(i, j)] = ONE;
        }
    }
    v
}

/// `V_ι`: `ξ ↦ ξ_ι`, `h_ι^o ↦ h_ι^o`, everything else to zero.
fn v_home(basis: &ProductBasis, iota: Index) -> CMatrix {
    isometry(basis, basis.spaces().h(iota).dim(), |w| {
        match (w.letters.is_empty(), w.terminal) {
            (true, None) => Some(0),
            (true, Some(t)) if t.index == iota => Some(t.coord),
            _ => None,
        }
    })
}

/// `V^* X V`.
fn conjugate(v: &CMatrix, x: &CMatrix) -> Result<CMatrix> {
    v.conj_transpose().matmul(&x.matmul(v)?)
}

fn wrap(
    basis: &Arc<ProductBasis>,
    dense: CMatrix,
    provenance: Provenance,
    norm_bound: f64,
) -> Result<EmbeddedOperator> {
    EmbeddedOperator::from_parts(basis.clone(), SparseMatrix::from_dense(&dense), provenance, norm_bound)
}

/// `V_ι^* T V_ι` on the Boolean product `H_β^o ⊕ Cξ ⊕ H_α^o` (both K-spaces
/// one-dimensional).
pub fn embed_boolean(t: &CMatrix, iota: Index, basis: &Arc<ProductBasis>) -> Result<EmbeddedOperator> {
    let spaces = basis.spaces();
    require(basis.side() == BasisSide::H, "Boolean embedding acts on an H-side basis")?;
    require(
        spaces.k_alpha.dim() == 1 && spaces.k_beta.dim() == 1,
        "Boolean product needs dim K_alpha = dim K_beta = 1",
    )?;
    require_square(t, spaces.h(iota).dim(), "T against dim H_iota")?;
    let v = v_home(basis, iota);
    wrap(
        basis,
        conjugate(&v, t)?,
        Provenance::Boolean {
            index: iota,
            t: t.clone(),
        },
        t.spectral_norm(),
    )
}

/// Monotone embeddings on `H_β^o⊗H_α^o ⊕ H_α^o ⊕ Cξ ⊕ H_β^o` (dim K_α = 1,
/// K_β = H_β), ordering `α < β`:
/// `α ↦ V_α^* T V_α`, `β ↦ V_β^* T V_β + V^(0)*(T ⊗ id_{H_α^o}) V^(0)`.
pub fn embed_monotone(t: &CMatrix, iota: Index, basis: &Arc<ProductBasis>) -> Result<EmbeddedOperator> {
    let spaces = basis.spaces();
    require(basis.side() == BasisSide::H, "monotone embedding acts on an H-side basis")?;
    require(
        spaces.k_alpha.dim() == 1 && spaces.k_beta.dim() == spaces.h_beta.dim(),
        "monotone product needs dim K_alpha = 1 and K_beta = H_beta",
    )?;
    require_square(t, spaces.h(iota).dim(), "T against dim H_iota")?;
    let mut dense = conjugate(&v_home(basis, iota), t)?;
    if iota == Index::Beta {
        let ra = spaces.h_alpha.reduced_dim();
        // V^(0): h_α^o[c] ↦ ξ_β ⊗ e_c, k_β[k] ⊗ h_α^o[c] ↦ e_k ⊗ e_c.
        let v0 = isometry(basis, spaces.h_beta.dim() * ra, |w| {
            let term = w.terminal.filter(|t| t.index == Index::Alpha)?;
            match w.letters.as_slice() {
                [] => Some(term.coord - 1),
                [Letter { index: Index::Beta, coord }] => Some(coord * ra + term.coord - 1),
                _ => None,
            }
        });
        let lifted = t.kron(&CMatrix::identity(ra));
        dense = dense.add(&conjugate(&v0, &lifted)?)?;
    }
    wrap(
        basis,
        dense,
        Provenance::Monotone {
            index: iota,
            t: t.clone(),
        },
        t.spectral_norm(),
    )
}

/// Orthogonal embeddings on `Cξ ⊕ H_α^o ⊕ (K_β^o ⊗ H_α^o)` (dim K_α = 1,
/// dim H_β = 1): `τ_α(T) = U^*(T ⊗ P_{η_β})U` and
/// `τ_β(S) = U^*(P_{ξ_α}^⊥ ⊗ S)U`, with `U` the isometry into `H_α ⊗ K_β`.
pub fn embed_orthogonal(t: &CMatrix, role: Index, basis: &Arc<ProductBasis>) -> Result<EmbeddedOperator> {
    let spaces = basis.spaces();
    require(basis.side() == BasisSide::H, "orthogonal embedding acts on an H-side basis")?;
    require(
        spaces.k_alpha.dim() == 1 && spaces.h_beta.dim() == 1,
        "orthogonal product needs dim K_alpha = 1 and dim H_beta = 1",
    )?;
    let (ha, kb) = (spaces.h_alpha.dim(), spaces.k_beta.dim());
    let u = isometry(basis, ha * kb, |w| {
        let c = w.terminal.map_or(0, |t| t.coord);
        match w.letters.as_slice() {
            [] => Some(c * kb),
            [Letter { index: Index::Beta, coord }] => Some(c * kb + coord),
            _ => None,
        }
    });
    let x = match role {
        Index::Alpha => {
            require_square(t, ha, "T against dim H_alpha")?;
            let p = CMatrix::diag(&vec_with_first(kb, ONE, Complex64::new(0.0, 0.0)));
            t.kron(&p)
        }
        Index::Beta => {
            require_square(t, kb, "S against dim K_beta")?;
            let p_perp = CMatrix::diag(&vec_with_first(ha, Complex64::new(0.0, 0.0), ONE));
            p_perp.kron(t)
        }
    };
    wrap(
        basis,
        conjugate(&u, &x)?,
        Provenance::Orthogonal {
            role,
            t: t.clone(),
        },
        t.spectral_norm(),
    )
}

fn vec_with_first(n: usize, first: Complex64, rest: Complex64) -> Vec<Complex64> {
    (0..n).map(|i| if i == 0 { first } else { rest }).collect()
}

/// With `H_ι = K_ι` the H-side word `k_1 ⊗ ⋯ ⊗ k_n ⊗ h` is the free-product
/// word `k_1 ⊗ ⋯ ⊗ k_n ⊗ h`; `ξ` corresponds to `η`. H-side depth `d` maps
/// onto K-side depth `d + 1`.
pub fn free_word_correspondence(w: &BasisWord) -> BasisWord {
    let mut letters = w.letters.clone();
    letters.extend(w.terminal);
    BasisWord::new(letters, None)
}
