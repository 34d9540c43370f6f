//! Free copies inside a c-free product: `H_β = H_α ⊕ H_α`, `K_β = K_α ⊕ K_α`,
//! and the vector `η̃ = η_β^⊥ ⊗ h_α^o` at which the two embedded copies are
//! simultaneously c-free (with `ξ`) and free.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde_json::json;

use crate::embeddings::{embed_cfree, EmbeddedOperator, OperatorPair};
use crate::error::{Error, Result};
use crate::numkernel::{CMatrix, CVector};
use crate::spaces::{
    build_product_basis, BasisSide, BasisWord, FourSpaces, Index, Letter, PointedSpace,
    ProductBasis,
};
use crate::states::CENTERING_TOL;

#[derive(Debug, Clone)]
pub struct FreeCopyContext {
    h_alpha: PointedSpace,
    k_alpha: PointedSpace,
    basis: Arc<ProductBasis>,
    eta_tilde_word: BasisWord,
    eta_tilde_position: usize,
}

/// Builds the doubled spaces and the H-side basis at `depth`.
///
/// Requires `dim H_α ≥ 2` (so `h_α^o` exists) and `depth ≥ 1` (so `η̃`, which
/// carries one K-letter, is in the truncated space).
pub fn build_free_copy_context(
    h_alpha: PointedSpace,
    k_alpha: PointedSpace,
    depth: usize,
) -> Result<FreeCopyContext> {
    if h_alpha.dim() < 2 {
        return Err(Error::Precondition("free copies need dim H_alpha >= 2".into()));
    }
    if depth < 1 {
        return Err(Error::Precondition("free copies need depth >= 1".into()));
    }
    let spaces = FourSpaces {
        h_alpha,
        k_alpha,
        h_beta: PointedSpace::new(2 * h_alpha.dim())?,
        k_beta: PointedSpace::new(2 * k_alpha.dim())?,
    };
    let basis = Arc::new(build_product_basis(spaces, depth, BasisSide::H));
    // η_β^⊥ = (0, η_α) is the first vector of the second summand of K_β.
    let eta_tilde_word = BasisWord::new(
        vec![Letter::new(Index::Beta, k_alpha.dim())],
        Some(Letter::new(Index::Alpha, 1)),
    );
    let eta_tilde_position = basis
        .position(&eta_tilde_word)
        .expect("depth >= 1 keeps the one-letter word");
    Ok(FreeCopyContext {
        h_alpha,
        k_alpha,
        basis,
        eta_tilde_word,
        eta_tilde_position,
    })
}

impl FreeCopyContext {
    pub fn basis(&self) -> &Arc<ProductBasis> {
        &self.basis
    }

    pub fn spaces(&self) -> &FourSpaces {
        self.basis.spaces()
    }

    pub fn depth(&self) -> usize {
        self.basis.depth()
    }

    pub fn h_alpha(&self) -> PointedSpace {
        self.h_alpha
    }

    pub fn k_alpha(&self) -> PointedSpace {
        self.k_alpha
    }

    /// Coordinate of `η_β^⊥` in `K_β`.
    pub fn eta_perp_coord(&self) -> usize {
        self.k_alpha.dim()
    }

    pub fn eta_tilde_word(&self) -> &BasisWord {
        &self.eta_tilde_word
    }

    pub fn eta_tilde_position(&self) -> usize {
        self.eta_tilde_position
    }

    pub fn eta_tilde(&self) -> CVector {
        CVector::basis(self.basis.len(), self.eta_tilde_position)
    }

    pub fn xi(&self) -> CVector {
        self.basis.distinguished_vector()
    }

    /// `(τ_ι(x), σ_ι(x))`: the input pair on the α side, its diagonal double on
    /// the β side.
    pub fn rho_pair(&self, x_t: &CMatrix, x_s: &CMatrix, side: Index) -> Result<OperatorPair> {
        let (h, k) = (self.h_alpha.dim(), self.k_alpha.dim());
        if !x_t.is_square() || x_t.rows() != h {
            return Err(Error::DimensionMismatch {
                context: "x_T against dim H_alpha",
                expected: h,
                found: x_t.rows(),
            });
        }
        if !x_s.is_square() || x_s.rows() != k {
            return Err(Error::DimensionMismatch {
                context: "x_S against dim K_alpha",
                expected: k,
                found: x_s.rows(),
            });
        }
        match side {
            Index::Alpha => OperatorPair::new(Index::Alpha, x_t.clone(), x_s.clone()),
            Index::Beta => OperatorPair::new(Index::Beta, x_t.direct_sum(x_t), x_s.direct_sum(x_s)),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "dims": self.spaces().dims(),
            "depth": self.depth(),
            "eta_tilde_word": self.eta_tilde_word,
            "eta_tilde_position": self.eta_tilde_position,
            "basis_hash": self.basis.content_hash(),
        })
    }
}

/// `ρ_ι(x) = Λ_(τ_ι(x), σ_ι(x))`.
pub fn rho(x_t: &CMatrix, x_s: &CMatrix, side: Index, ctx: &FreeCopyContext) -> Result<EmbeddedOperator> {
    embed_cfree(&ctx.rho_pair(x_t, x_s, side)?, &ctx.basis)
}

/// `ρ_{b(r)} ρ_{a(r)} ⋯ ρ_{b(1)} ρ_{a(1)} η̃` for ψ-centered inputs, built as
/// the pure tensor `(P^⊥S_{b(r)}η_β)⊗(P^⊥S_{a(r)}η_α)⊗⋯⊗η̃`.
///
/// `inputs` holds `(x_T, x_S)` in application order `a(1), b(1), a(2), …`;
/// odd positions embed on the α side, even positions on the β side.
pub fn alternating_product_at_eta_tilde(
    inputs: &[(CMatrix, CMatrix)],
    ctx: &FreeCopyContext,
) -> Result<CVector> {
    if !inputs.len().is_multiple_of(2) {
        return Err(Error::Precondition(
            "the closed form needs pairs a(j), b(j): an even number of inputs".into(),
        ));
    }
    let k = ctx.k_alpha.dim();
    for (position, (x_t, x_s)) in inputs.iter().enumerate() {
        if x_t.rows() != ctx.h_alpha.dim() || !x_s.is_square() || x_s.rows() != k {
            return Err(Error::DimensionMismatch {
                context: "free-copy input against base spaces",
                expected: k,
                found: x_s.rows(),
            });
        }
        let value = x_s[(0, 0)];
        if value.norm() > CENTERING_TOL {
            return Err(Error::NotCentered { position, value });
        }
    }
    if inputs.len() + 1 > ctx.depth() {
        return Err(Error::DepthExceeded {
            requested: inputs.len() + 1,
            depth: ctx.depth(),
        });
    }
    // On either side only the first copy of K_α carries P^⊥ S η: the doubled
    // S_β = x_S ⊕ x_S maps η_β = (η_α, 0) into the first summand.
    let mut terms: HashMap<BasisWord, Complex64> =
        HashMap::from([(ctx.eta_tilde_word.clone(), Complex64::new(1.0, 0.0))]);
    for (position, (_, x_s)) in inputs.iter().enumerate() {
        let index = if position % 2 == 0 { Index::Alpha } else { Index::Beta };
        terms = terms
            .into_iter()
            .flat_map(|(w, coeff)| {
                (1..k).map(move |c| (w.prepend(Letter::new(index, c)), coeff * x_s[(c, 0)]))
            })
            .collect();
    }
    let mut out = CVector::zeros(ctx.basis.len());
    for (w, coeff) in terms {
        let pos = ctx
            .basis
            .position(&w)
            .expect("closed-form words stay within depth");
        out[pos] += coeff;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::inner;
    use crate::random::{random_self_adjoint, trial_rng};
    use crate::states::vector_state;

    fn ctx(h: usize, k: usize, depth: usize) -> FreeCopyContext {
        build_free_copy_context(PointedSpace::new(h).unwrap(), PointedSpace::new(k).unwrap(), depth).unwrap()
    }

    fn centered_s(n: usize, rng: &mut rand_chacha::ChaCha8Rng) -> CMatrix {
        let s = random_self_adjoint(n, rng);
        s.shift(s[(0, 0)])
    }

    #[test]
    fn context_layout() {
        let c = ctx(2, 2, 2);
        assert_eq!(c.spaces().dims(), [2, 2, 4, 4]);
        assert_eq!(
            c.eta_tilde_word(),
            &BasisWord::new(vec![Letter::new(Index::Beta, 2)], Some(Letter::new(Index::Alpha, 1)))
        );
        assert!((c.eta_tilde().norm() - 1.0).abs() < 1e-15);
        assert_eq!(c.to_json()["eta_tilde_position"], c.eta_tilde_position());
    }

    #[test]
    fn context_preconditions() {
        let one = PointedSpace::new(1).unwrap();
        let two = PointedSpace::new(2).unwrap();
        assert!(build_free_copy_context(one, two, 3).is_err());
        assert!(build_free_copy_context(two, two, 0).is_err());
        assert!(build_free_copy_context(two, one, 2).is_ok());
    }

    #[test]
    fn doubled_state_at_eta_perp_matches_base_state() {
        let c = ctx(3, 3, 2);
        let mut rng = trial_rng(2, 0);
        let x = random_self_adjoint(3, &mut rng);
        let doubled = x.direct_sum(&x);
        let perp = CVector::basis(6, c.eta_perp_coord());
        let lhs = inner(&doubled.apply(&perp).unwrap(), &perp).unwrap();
        assert!((lhs - x[(0, 0)]).norm() < 1e-15);
    }

    #[test]
    fn states_agree_at_xi_and_eta_tilde() {
        let c = ctx(3, 3, 3);
        let mut rng = trial_rng(6, 0);
        for side in Index::BOTH {
            let xt = random_self_adjoint(3, &mut rng);
            let xs = random_self_adjoint(3, &mut rng);
            let r = rho(&xt, &xs, side, &c).unwrap();
            assert!((vector_state(&r, &c.xi()).unwrap() - xt[(0, 0)]).norm() <= 1e-12);
            assert!((vector_state(&r, &c.eta_tilde()).unwrap() - xs[(0, 0)]).norm() <= 1e-12);
            let id = rho(&CMatrix::identity(3), &CMatrix::identity(3), side, &c).unwrap();
            assert_eq!(id.to_dense().max_abs_diff(&CMatrix::identity(c.basis().len())), 0.0);
        }
    }

    #[test]
    fn closed_form_matches_matrix_application() {
        let c = ctx(3, 3, 5);
        for trial in 0..4 {
            let mut rng = trial_rng(17, trial);
            let inputs: Vec<(CMatrix, CMatrix)> = (0..4)
                .map(|_| (random_self_adjoint(3, &mut rng), centered_s(3, &mut rng)))
                .collect();
            let closed = alternating_product_at_eta_tilde(&inputs, &c).unwrap();
            let mut direct = c.eta_tilde();
            for (pos, (xt, xs)) in inputs.iter().enumerate() {
                let side = if pos % 2 == 0 { Index::Alpha } else { Index::Beta };
                direct = rho(xt, xs, side, &c).unwrap().apply(&direct).unwrap();
            }
            assert!(closed.max_abs_diff(&direct) <= 1e-11);
        }
    }

    #[test]
    fn closed_form_edge_cases() {
        let c = ctx(2, 2, 3);
        let diag = CMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]]).unwrap();
        let inputs = vec![(CMatrix::identity(2), diag.clone()), (CMatrix::identity(2), diag)];
        assert_eq!(alternating_product_at_eta_tilde(&inputs, &c).unwrap().max_abs(), 0.0);
        let raw = vec![(CMatrix::identity(2), CMatrix::identity(2)); 2];
        assert!(matches!(alternating_product_at_eta_tilde(&raw, &c), Err(Error::NotCentered { .. })));
        let small = ctx(2, 2, 2);
        let z = vec![(CMatrix::zeros(2, 2), CMatrix::zeros(2, 2)); 2];
        assert!(matches!(alternating_product_at_eta_tilde(&z, &small), Err(Error::DepthExceeded { .. })));
        assert!(alternating_product_at_eta_tilde(&z[..1], &c).is_err());
    }
}
