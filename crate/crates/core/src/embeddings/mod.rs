//! Embedded operators on the truncated product spaces.
//!
//! `Λ_(T,S)` acts on the H-side: as `T` on `Cξ ⊕ H_ι^o` and as a copy of `S`
//! on every block `Cη_ι ⊗ w ⊕ K_ι^o ⊗ w`. The free-product embedding `λ_ι(S)`
//! acts on the K-side by the same `S` rule. Both are compressions to the
//! depth-`d` subspace: components that would need more than `d` K-letters are
//! dropped.

mod special;

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::numkernel::{CMatrix, CVector, LinearOp, SparseMatrix};
use crate::report::CheckReport;
use crate::spaces::{
    classify_for_embedding, BasisSide, BasisWord, EmbeddingBlock, FourSpaces, Index, Letter,
    ProductBasis,
};

pub use special::{
    embed_boolean, embed_monotone, embed_orthogonal, free_word_correspondence,
};

/// `(T_ι, S_ι) ∈ B(H_ι) × B(K_ι)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorPair {
    pub index: Index,
    pub t: CMatrix,
    pub s: CMatrix,
}

impl OperatorPair {
    pub fn new(index: Index, t: CMatrix, s: CMatrix) -> Result<Self> {
        for (m, what) in [(&t, "T must be square"), (&s, "S must be square")] {
            if !m.is_square() {
                return Err(Error::DimensionMismatch {
                    context: what,
                    expected: m.rows(),
                    found: m.cols(),
                });
            }
        }
        Ok(OperatorPair { index, t, s })
    }

    pub fn identity(index: Index, spaces: &FourSpaces) -> Self {
        OperatorPair {
            index,
            t: CMatrix::identity(spaces.h(index).dim()),
            s: CMatrix::identity(spaces.k(index).dim()),
        }
    }

    pub fn zero(index: Index, spaces: &FourSpaces) -> Self {
        let (h, k) = (spaces.h(index).dim(), spaces.k(index).dim());
        OperatorPair {
            index,
            t: CMatrix::zeros(h, h),
            s: CMatrix::zeros(k, k),
        }
    }

    /// `⟨T ξ_ι, ξ_ι⟩`.
    pub fn phi_value(&self) -> Complex64 {
        self.t[(0, 0)]
    }

    /// `⟨S η_ι, η_ι⟩`.
    pub fn psi_value(&self) -> Complex64 {
        self.s[(0, 0)]
    }

    pub fn adjoint(&self) -> OperatorPair {
        OperatorPair {
            index: self.index,
            t: self.t.conj_transpose(),
            s: self.s.conj_transpose(),
        }
    }

    /// `(T_self T_other, S_self S_other)`.
    pub fn compose(&self, other: &OperatorPair) -> Result<OperatorPair> {
        if self.index != other.index {
            return Err(Error::Precondition("composed pairs must share an index".into()));
        }
        Ok(OperatorPair {
            index: self.index,
            t: self.t.matmul(&other.t)?,
            s: self.s.matmul(&other.s)?,
        })
    }

    pub fn add(&self, other: &OperatorPair) -> Result<OperatorPair> {
        if self.index != other.index {
            return Err(Error::Precondition("added pairs must share an index".into()));
        }
        Ok(OperatorPair {
            index: self.index,
            t: self.t.add(&other.t)?,
            s: self.s.add(&other.s)?,
        })
    }

    pub fn scale(&self, c: Complex64) -> OperatorPair {
        OperatorPair {
            index: self.index,
            t: self.t.scale(c),
            s: self.s.scale(c),
        }
    }

    /// `(T − c·I, S − c·I)`.
    pub fn shift(&self, c: Complex64) -> OperatorPair {
        OperatorPair {
            index: self.index,
            t: self.t.shift(c),
            s: self.s.shift(c),
        }
    }

    /// `max(‖T‖, ‖S‖)`, the norm bound of every embedding of the pair.
    pub fn norm(&self) -> f64 {
        self.t.spectral_norm().max(self.s.spectral_norm())
    }

    fn check_against(&self, spaces: &FourSpaces) -> Result<()> {
        let h = spaces.h(self.index).dim();
        let k = spaces.k(self.index).dim();
        if self.t.rows() != h {
            return Err(Error::DimensionMismatch {
                context: "T against dim H_iota",
                expected: h,
                found: self.t.rows(),
            });
        }
        if self.s.rows() != k {
            return Err(Error::DimensionMismatch {
                context: "S against dim K_iota",
                expected: k,
                found: self.s.rows(),
            });
        }
        Ok(())
    }
}

/// How an [`EmbeddedOperator`] was produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Provenance {
    /// `Λ_(T,S)` on the H-side.
    CFree { pair: OperatorPair },
    /// `λ_ι(S)` on the K-side.
    Free { index: Index, s: CMatrix },
    Boolean { index: Index, t: CMatrix },
    Monotone { index: Index, t: CMatrix },
    /// `role` is `Alpha` for `τ_α(T)` and `Beta` for `τ_β(S)`.
    Orthogonal { role: Index, t: CMatrix },
    /// Sums, products and other combinations.
    Derived { description: String },
}

/// A sparse operator on a [`ProductBasis`].
#[derive(Debug, Clone)]
pub struct EmbeddedOperator {
    basis: Arc<ProductBasis>,
    matrix: SparseMatrix,
    provenance: Provenance,
    norm_bound: f64,
}

impl EmbeddedOperator {
    /// Wraps an arbitrary matrix. `norm_bound` must dominate its spectral norm.
    pub fn from_parts(
        basis: Arc<ProductBasis>,
        matrix: SparseMatrix,
        provenance: Provenance,
        norm_bound: f64,
    ) -> Result<Self> {
        if matrix.n_rows() != basis.len() || matrix.n_cols() != basis.len() {
            return Err(Error::DimensionMismatch {
                context: "embedded operator against basis size",
                expected: basis.len(),
                found: matrix.n_rows().max(matrix.n_cols()),
            });
        }
        Ok(EmbeddedOperator {
            basis,
            matrix,
            provenance,
            norm_bound,
        })
    }

    pub fn identity(basis: &Arc<ProductBasis>) -> Self {
        EmbeddedOperator {
            basis: basis.clone(),
            matrix: SparseMatrix::identity(basis.len()),
            provenance: Provenance::Derived {
                description: "identity".into(),
            },
            norm_bound: 1.0,
        }
    }

    pub fn basis(&self) -> &Arc<ProductBasis> {
        &self.basis
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// An upper bound on the spectral norm, from the input matrices.
    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    /// The index carried by a single-index embedding.
    pub fn index(&self) -> Option<Index> {
        match &self.provenance {
            Provenance::CFree { pair } => Some(pair.index),
            Provenance::Free { index, .. }
            | Provenance::Boolean { index, .. }
            | Provenance::Monotone { index, .. } => Some(*index),
            Provenance::Orthogonal { role, .. } => Some(*role),
            Provenance::Derived { .. } => None,
        }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<CVector> {
        if v.len() != self.len() {
            return Err(Error::DimensionMismatch {
                context: "embedded operator apply",
                expected: self.len(),
                found: v.len(),
            });
        }
        Ok(self.matrix.apply(v))
    }

    pub fn to_dense(&self) -> CMatrix {
        self.matrix.to_dense()
    }

    pub fn same_basis(&self, other: &EmbeddedOperator) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis)
            || (self.basis.side() == other.basis.side()
                && self.basis.depth() == other.basis.depth()
                && self.basis.spaces() == other.basis.spaces())
    }

    fn require_same_basis(&self, other: &EmbeddedOperator) -> Result<()> {
        if self.same_basis(other) {
            Ok(())
        } else {
            Err(Error::Precondition("operators live on different bases".into()))
        }
    }

    pub fn adjoint(&self) -> EmbeddedOperator {
        let provenance = match &self.provenance {
            Provenance::CFree { pair } => Provenance::CFree {
                pair: pair.adjoint(),
            },
            Provenance::Free { index, s } => Provenance::Free {
                index: *index,
                s: s.conj_transpose(),
            },
            other => Provenance::Derived {
                description: format!("adjoint of {}", describe(other)),
            },
        };
        EmbeddedOperator {
            basis: self.basis.clone(),
            matrix: self.matrix.conj_transpose(),
            provenance,
            norm_bound: self.norm_bound,
        }
    }

    pub fn add(&self, other: &EmbeddedOperator) -> Result<EmbeddedOperator> {
        self.require_same_basis(other)?;
        Ok(EmbeddedOperator {
            basis: self.basis.clone(),
            matrix: self.matrix.add(&other.matrix),
            provenance: Provenance::Derived {
                description: format!("{} + {}", describe(&self.provenance), describe(&other.provenance)),
            },
            norm_bound: self.norm_bound + other.norm_bound,
        })
    }

    /// `self · other`.
    pub fn mul(&self, other: &EmbeddedOperator) -> Result<EmbeddedOperator> {
        self.require_same_basis(other)?;
        Ok(EmbeddedOperator {
            basis: self.basis.clone(),
            matrix: self.matrix.matmul(&other.matrix),
            provenance: Provenance::Derived {
                description: format!("{} * {}", describe(&self.provenance), describe(&other.provenance)),
            },
            norm_bound: self.norm_bound * other.norm_bound,
        })
    }

    pub fn scale(&self, c: Complex64) -> EmbeddedOperator {
        EmbeddedOperator {
            basis: self.basis.clone(),
            matrix: self.matrix.scale(c),
            provenance: Provenance::Derived {
                description: format!("scaled {}", describe(&self.provenance)),
            },
            norm_bound: self.norm_bound * c.norm(),
        }
    }

    /// `{basis_hash, matrix}` for golden files.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "basis_hash": self.basis.content_hash(),
            "matrix": self.to_dense(),
        })
    }
}

fn describe(p: &Provenance) -> String {
    match p {
        Provenance::CFree { pair } => format!("Lambda_{}", pair.index),
        Provenance::Free { index, .. } => format!("lambda_{index}"),
        Provenance::Boolean { index, .. } => format!("boolean_{index}"),
        Provenance::Monotone { index, .. } => format!("monotone_{index}"),
        Provenance::Orthogonal { role, .. } => format!("tau_{role}"),
        Provenance::Derived { description } => format!("({description})"),
    }
}

impl LinearOp for EmbeddedOperator {
    fn dim(&self) -> usize {
        self.len()
    }

    fn apply(&self, x: &[Complex64]) -> CVector {
        self.matrix.apply(x)
    }

    fn to_dense(&self) -> CMatrix {
        self.matrix.to_dense()
    }
}

/// Sum of operators on a common basis.
pub fn sum(ops: &[&EmbeddedOperator]) -> Result<EmbeddedOperator> {
    let (first, rest) = ops
        .split_first()
        .ok_or_else(|| Error::Precondition("sum of no operators".into()))?;
    rest.iter().try_fold((*first).clone(), |acc, op| acc.add(op))
}

/// Column of an `S` block: the scalar-plus-prepend rule for words not starting
/// with `ι`, the strip rule for words that do.
fn s_block_column(
    basis: &ProductBasis,
    w: &BasisWord,
    iota: Index,
    s: &CMatrix,
) -> Vec<(usize, Complex64)> {
    let (base, col) = match w.strip() {
        Some((first, rest)) if first.index == iota => (rest, first.coord),
        _ => (w.clone(), 0),
    };
    let mut out = Vec::with_capacity(s.rows());
    let base_pos = basis
        .position(&base)
        .expect("stripped word of a basis word is a basis word");
    out.push((base_pos, s[(0, col)]));
    if base.letter_count() < basis.depth() {
        for c in 1..s.rows() {
            let extended = base.prepend(Letter::new(iota, c));
            let pos = basis
                .position(&extended)
                .expect("prepending within depth stays in the basis");
            out.push((pos, s[(c, col)]));
        }
    }
    out
}

/// `Λ_(T,S)` on an H-side basis.
pub fn embed_cfree(pair: &OperatorPair, basis: &Arc<ProductBasis>) -> Result<EmbeddedOperator> {
    if basis.side() != BasisSide::H {
        return Err(Error::WrongBasisSide { expected: "H" });
    }
    pair.check_against(basis.spaces())?;
    let iota = pair.index;
    // Flat positions of ξ, h_ι^o[1], …: the copy of H_ι on which T acts.
    let home: Vec<usize> = std::iter::once(0)
        .chain((1..pair.t.rows()).map(|c| {
            basis
                .position(&BasisWord::bare(iota, c))
                .expect("bare terminals are always in the basis")
        }))
        .collect();
    let columns = basis
        .words()
        .iter()
        .map(|w| -> Result<Vec<(usize, Complex64)>> {
            Ok(match classify_for_embedding(w, iota)? {
                EmbeddingBlock::XiOrHome => {
                    let j = w.terminal.map_or(0, |t| t.coord);
                    home.iter()
                        .enumerate()
                        .map(|(r, &pos)| (pos, pair.t[(r, j)]))
                        .collect()
                }
                EmbeddingBlock::Strip | EmbeddingBlock::Prepend => {
                    s_block_column(basis, w, iota, &pair.s)
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EmbeddedOperator {
        basis: basis.clone(),
        matrix: SparseMatrix::from_columns(basis.len(), columns),
        norm_bound: pair.norm(),
        provenance: Provenance::CFree { pair: pair.clone() },
    })
}

/// Voiculescu's `λ_ι(S)` on a K-side basis.
pub fn embed_free(s: &CMatrix, iota: Index, basis: &Arc<ProductBasis>) -> Result<EmbeddedOperator> {
    if basis.side() != BasisSide::K {
        return Err(Error::WrongBasisSide { expected: "K" });
    }
    let k = basis.spaces().k(iota).dim();
    if !s.is_square() || s.rows() != k {
        return Err(Error::DimensionMismatch {
            context: "S against dim K_iota",
            expected: k,
            found: s.rows(),
        });
    }
    let columns = basis
        .words()
        .iter()
        .map(|w| s_block_column(basis, w, iota, s))
        .collect();
    Ok(EmbeddedOperator {
        basis: basis.clone(),
        matrix: SparseMatrix::from_columns(basis.len(), columns),
        norm_bound: s.spectral_norm(),
        provenance: Provenance::Free {
            index: iota,
            s: s.clone(),
        },
    })
}

/// Largest entry gap between `Λ_(T2 T1, S2 S1)` and `Λ_(T2,S2) Λ_(T1,S1)` on
/// the columns with at most `depth − 1` letters, where truncation cannot
/// interfere.
pub fn multiplicativity_gap(
    second: &OperatorPair,
    first: &OperatorPair,
    basis: &Arc<ProductBasis>,
) -> Result<f64> {
    let product = embed_cfree(&second.compose(first)?, basis)?;
    let composed = embed_cfree(second, basis)?
        .matrix
        .matmul(&embed_cfree(first, basis)?.matrix);
    let depth = basis.depth();
    Ok(product
        .matrix
        .max_abs_diff_on_columns(&composed, |j| basis.word(j).letter_count() < depth))
}

/// Compares `Λ_(T,S)^*` with `Λ_(T^*,S^*)` and checks multiplicativity of
/// `Λ` on `(T,S)` composed with itself and with its adjoint, below the top
/// layer.
pub fn adjoint_compatibility_check(
    pair: &OperatorPair,
    basis: &Arc<ProductBasis>,
) -> Result<CheckReport> {
    let lambda = embed_cfree(pair, basis)?;
    let lambda_star = embed_cfree(&pair.adjoint(), basis)?;
    let adjoint_gap = lambda.adjoint().matrix.max_abs_diff(&lambda_star.matrix);
    let square_gap = multiplicativity_gap(pair, pair, basis)?;
    let gram_gap = multiplicativity_gap(&pair.adjoint(), pair, basis)?;
    let worst = adjoint_gap.max(square_gap).max(gram_gap);
    let scale = (1.0 + pair.norm()).powi(2);
    Ok(CheckReport::gap(
        "lambda_adjoint_and_multiplicativity",
        worst,
        scale,
        1e-12,
        json!({
            "index": pair.index,
            "depth": basis.depth(),
            "dims": basis.spaces().dims(),
            "adjoint_gap": adjoint_gap,
            "square_gap": square_gap,
            "gram_gap": gram_gap,
        }),
    ))
}

/// Orthogonal projection onto `Cξ ⊕ H_ι^o`, as a diagonal 0/1 mask.
pub fn home_block_mask(basis: &ProductBasis, iota: Index) -> Vec<bool> {
    basis
        .words()
        .iter()
        .map(|w| {
            matches!(
                classify_for_embedding(w, iota),
                Ok(EmbeddingBlock::XiOrHome)
            )
        })
        .collect()
}
