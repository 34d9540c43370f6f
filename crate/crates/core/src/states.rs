//! Vector states, mixed moments, ψ-centering and the closed form of an
//! alternating product of centered `Λ`'s applied to `ξ`.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::embeddings::{EmbeddedOperator, OperatorPair};
use crate::error::{Error, Result};
use crate::numkernel::json::complex_vec;
use crate::numkernel::{inner, CVector, LinearOp, ONE};
use crate::spaces::{BasisSide, BasisWord, Letter, ProductBasis};

/// Tolerance on `‖v‖ = 1` for state vectors.
pub const UNIT_TOL: f64 = 1e-12;
/// Tolerance on `⟨S η_ι, η_ι⟩ = 0` for centered pairs.
pub const CENTERING_TOL: f64 = 1e-12;

/// The moments `m_1 … m_N` of one element under both states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentData {
    pub order: usize,
    #[serde(with = "complex_vec")]
    pub phi_moments: Vec<Complex64>,
    #[serde(with = "complex_vec")]
    pub psi_moments: Vec<Complex64>,
}

#[derive(Serialize)]
struct MomentRow {
    n: usize,
    re_phi: f64,
    im_phi: f64,
    re_psi: f64,
    im_psi: f64,
}

impl MomentData {
    pub fn new(phi_moments: Vec<Complex64>, psi_moments: Vec<Complex64>) -> Result<Self> {
        if phi_moments.len() != psi_moments.len() {
            return Err(Error::DimensionMismatch {
                context: "phi and psi moment lists",
                expected: phi_moments.len(),
                found: psi_moments.len(),
            });
        }
        Ok(MomentData {
            order: phi_moments.len(),
            phi_moments,
            psi_moments,
        })
    }

    /// Both states equal: `φ = ψ`.
    pub fn single_state(moments: Vec<Complex64>) -> Self {
        MomentData {
            order: moments.len(),
            phi_moments: moments.clone(),
            psi_moments: moments,
        }
    }

    /// CSV with header `n,re_phi,im_phi,re_psi,im_psi`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for (i, (p, q)) in self.phi_moments.iter().zip(&self.psi_moments).enumerate() {
            w.serialize(MomentRow {
                n: i + 1,
                re_phi: p.re,
                im_phi: p.im,
                re_psi: q.re,
                im_psi: q.im,
            })
            .expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("moment serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: MomentData = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if m.phi_moments.len() != m.order || m.psi_moments.len() != m.order {
            return Err(Error::Parse("moment lists must have length `order`".into()));
        }
        Ok(m)
    }
}

fn check_unit(v: &[Complex64]) -> Result<()> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NonUnitVector { norm });
    }
    Ok(())
}

/// `⟨op·v, v⟩` for a unit vector `v`.
pub fn vector_state(op: &dyn LinearOp, v: &[Complex64]) -> Result<Complex64> {
    if v.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            context: "vector state",
            expected: op.dim(),
            found: v.len(),
        });
    }
    check_unit(v)?;
    inner(&op.apply(v), v)
}

/// `⟨ops[0] ops[1] ⋯ ops[n-1] v, v⟩`, applied right to left.
///
/// More factors than the basis depth yield [`Error::BeyondDepth`] carrying
/// the truncated value.
pub fn mixed_moment(ops: &[&EmbeddedOperator], v: &[Complex64]) -> Result<Complex64> {
    let Some(first) = ops.first() else {
        check_unit(v)?;
        return Ok(ONE);
    };
    if ops.iter().any(|op| !op.same_basis(first)) {
        return Err(Error::Precondition("mixed moment over different bases".into()));
    }
    if v.len() != first.len() {
        return Err(Error::DimensionMismatch {
            context: "mixed moment vector",
            expected: first.len(),
            found: v.len(),
        });
    }
    check_unit(v)?;
    let mut w = CVector::new(v.to_vec());
    for op in ops.iter().rev() {
        w = op.matrix().apply(&w);
    }
    let value = inner(&w, v)?;
    let depth = first.basis().depth();
    if ops.len() > depth {
        log::warn!(
            "mixed moment of {} factors exceeds depth {depth}; value is truncated",
            ops.len()
        );
        return Err(Error::BeyondDepth {
            value,
            len: ops.len(),
            depth,
        });
    }
    Ok(value)
}

/// `(T − ψ·I, S − ψ·I)` with `ψ = ⟨S η_ι, η_ι⟩`.
pub fn psi_center(pair: &OperatorPair) -> OperatorPair {
    pair.shift(pair.psi_value())
}

/// `Λ_n ⋯ Λ_1 ξ` for alternating ψ-centered pairs, assembled from the
/// closed form
/// `Σ_j (P^⊥S_n η)⊗⋯⊗(P^⊥S_{j+1} η)⊗(P^⊥T_j ξ) φ(T_{j-1})⋯φ(T_1) + ξ φ(T_n)⋯φ(T_1)`
/// without applying any embedded matrix. `pairs[0]` is applied first.
pub fn alternating_word_vector(pairs: &[OperatorPair], basis: &ProductBasis) -> Result<CVector> {
    if basis.side() != BasisSide::H {
        return Err(Error::WrongBasisSide { expected: "H" });
    }
    validate_alternating_centered(pairs)?;
    if pairs.len() > basis.depth() {
        return Err(Error::DepthExceeded {
            requested: pairs.len(),
            depth: basis.depth(),
        });
    }
    let spaces = basis.spaces();
    for p in pairs {
        let (h, k) = (spaces.h(p.index).dim(), spaces.k(p.index).dim());
        if p.t.rows() != h || p.s.rows() != k {
            return Err(Error::DimensionMismatch {
                context: "pair against basis spaces",
                expected: h,
                found: p.t.rows(),
            });
        }
    }

    let mut out = CVector::zeros(basis.len());
    // φ(T_{j-1}) ⋯ φ(T_1), scalars multiplied from the right.
    let mut phi_prefix = ONE;
    for (j, pj) in pairs.iter().enumerate() {
        // P^⊥ T_j ξ_j as terminal coefficients.
        let mut terms: HashMap<BasisWord, Complex64> = (1..pj.t.rows())
            .map(|c| (BasisWord::bare(pj.index, c), pj.t[(c, 0)]))
            .collect();
        for pk in &pairs[j + 1..] {
            terms = terms
                .into_iter()
                .flat_map(|(w, coeff)| {
                    (1..pk.s.rows()).map(move |c| (w.prepend(Letter::new(pk.index, c)), coeff * pk.s[(c, 0)]))
                })
                .collect();
        }
        for (w, coeff) in terms {
            let pos = basis
                .position(&w)
                .expect("closed-form words stay within depth");
            out[pos] += coeff * phi_prefix;
        }
        phi_prefix *= pj.phi_value();
    }
    out[0] += phi_prefix;
    Ok(out)
}

pub(crate) fn validate_alternating_centered(pairs: &[OperatorPair]) -> Result<()> {
    for (i, w) in pairs.windows(2).enumerate() {
        if w[0].index == w[1].index {
            return Err(Error::NotAlternating { position: i + 1 });
        }
    }
    for (i, p) in pairs.iter().enumerate() {
        let value = p.psi_value();
        if value.norm() > CENTERING_TOL {
            return Err(Error::NotCentered { position: i, value });
        }
    }
    Ok(())
}

/// `⟨op^n v, v⟩` for `n = 1..=order`.
pub fn power_moments(op: &dyn LinearOp, v: &[Complex64], order: usize) -> Result<Vec<Complex64>> {
    if v.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            context: "power moments vector",
            expected: op.dim(),
            found: v.len(),
        });
    }
    check_unit(v)?;
    let mut w = CVector::new(v.to_vec());
    (0..order)
        .map(|_| {
            w = op.apply(&w);
            inner(&w, v)
        })
        .collect()
}

/// φ-moments of `op` at `ξ` paired with ψ-moments of `companion` at `η`.
pub fn moment_data(
    op: &EmbeddedOperator,
    companion: &EmbeddedOperator,
    order: usize,
) -> Result<MomentData> {
    let depth = op.basis().depth().min(companion.basis().depth());
    if order > depth {
        return Err(Error::DepthExceeded {
            requested: order,
            depth,
        });
    }
    MomentData::new(
        power_moments(op, &op.basis().distinguished_vector(), order)?,
        power_moments(companion, &companion.basis().distinguished_vector(), order)?,
    )
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::embeddings::embed_cfree;
    use crate::numkernel::{CMatrix, ZERO};
    use crate::random::{random_pair, trial_rng};
    use crate::spaces::{build_product_basis, FourSpaces, Index};
    use Index::{Alpha, Beta};

    fn basis(dims: [usize; 4], depth: usize) -> Arc<ProductBasis> {
        Arc::new(build_product_basis(FourSpaces::from_dims(dims).unwrap(), depth, BasisSide::H))
    }

    #[test]
    fn vector_state_examples() {
        let id = CMatrix::identity(3);
        let v = CVector::new(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8), ZERO]);
        assert!((vector_state(&id, &v).unwrap() - ONE).norm() < 1e-15);
        let bad = CVector::from_real(&[1.0, 1.0, 0.0]);
        assert!(matches!(vector_state(&id, &bad), Err(Error::NonUnitVector { .. })));
        assert!(vector_state(&id, &CVector::basis(2, 0)).is_err());
    }

    #[test]
    fn mixed_moment_examples() {
        let b = basis([2, 2, 2, 2], 2);
        let xi = b.distinguished_vector();
        assert_eq!(mixed_moment(&[], &xi).unwrap(), ONE);
        let mut rng = trial_rng(5, 0);
        let p = random_pair(Alpha, b.spaces(), &mut rng);
        let l = embed_cfree(&p, &b).unwrap();
        assert_eq!(mixed_moment(&[&l], &xi).unwrap(), vector_state(&l, &xi).unwrap());
        match mixed_moment(&[&l, &l, &l], &xi) {
            Err(Error::BeyondDepth { len: 3, depth: 2, .. }) => {}
            other => panic!("expected BeyondDepth, got {other:?}"),
        }
    }

    #[test]
    fn psi_center_examples() {
        let s = FourSpaces::from_dims([2, 2, 2, 2]).unwrap();
        let id = OperatorPair::identity(Alpha, &s);
        let c = psi_center(&id);
        assert_eq!(c.t.max_abs(), 0.0);
        assert_eq!(c.s.max_abs(), 0.0);
        assert_eq!(psi_center(&c), c);
        let p = random_pair(Beta, &s, &mut trial_rng(9, 1));
        assert!(psi_center(&p).psi_value().norm() < 1e-14);
    }

    #[test]
    fn closed_form_base_case() {
        let b = basis([3, 3, 3, 3], 2);
        let p = psi_center(&random_pair(Alpha, b.spaces(), &mut trial_rng(3, 0)));
        let v = alternating_word_vector(std::slice::from_ref(&p), &b).unwrap();
        let direct = embed_cfree(&p, &b).unwrap().apply(&b.distinguished_vector()).unwrap();
        assert!(v.max_abs_diff(&direct) < 1e-15);
        assert_eq!(v[0], p.phi_value());
    }

    #[test]
    fn closed_form_vanishes_with_trivial_factors() {
        let b = basis([2, 2, 2, 2], 3);
        let mut pairs = Vec::new();
        for (i, iota) in [Alpha, Beta, Alpha].into_iter().enumerate() {
            // φ(T) = 0 and S η ∝ η, centered: every term carries a zero.
            let t = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.3 * i as f64]]).unwrap();
            let s = CMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 2.0]]).unwrap();
            pairs.push(OperatorPair::new(iota, t, s).unwrap());
        }
        for n in 2..=3 {
            let v = alternating_word_vector(&pairs[..n], &b).unwrap();
            assert_eq!(v.max_abs(), 0.0);
        }
    }

    #[test]
    fn closed_form_matches_matrix_application() {
        let b = basis([3, 3, 3, 3], 6);
        for trial in 0..5 {
            let mut rng = trial_rng(11, trial);
            let start = if trial % 2 == 0 { Alpha } else { Beta };
            let pairs: Vec<OperatorPair> = (0..4)
                .map(|i| {
                    let iota = if i % 2 == 0 { start } else { start.other() };
                    psi_center(&random_pair(iota, b.spaces(), &mut rng))
                })
                .collect();
            let closed = alternating_word_vector(&pairs, &b).unwrap();
            let mut direct = b.distinguished_vector();
            for p in &pairs {
                direct = embed_cfree(p, &b).unwrap().apply(&direct).unwrap();
            }
            assert!(closed.max_abs_diff(&direct) <= 1e-11);
        }
    }

    #[test]
    fn closed_form_preconditions() {
        let b = basis([2, 2, 2, 2], 2);
        let s = b.spaces();
        let a = psi_center(&random_pair(Alpha, s, &mut trial_rng(1, 0)));
        let c = psi_center(&random_pair(Beta, s, &mut trial_rng(1, 1)));
        assert!(matches!(
            alternating_word_vector(&[a.clone(), a.clone()], &b),
            Err(Error::NotAlternating { position: 1 })
        ));
        let raw = OperatorPair::identity(Beta, s);
        assert!(matches!(
            alternating_word_vector(&[a.clone(), raw], &b),
            Err(Error::NotCentered { position: 1, .. })
        ));
        assert!(matches!(
            alternating_word_vector(&[a.clone(), c, a], &b),
            Err(Error::DepthExceeded { requested: 3, depth: 2 })
        ));
    }

    #[test]
    fn moment_data_examples() {
        let b = basis([2, 2, 2, 2], 4);
        let k = Arc::new(build_product_basis(*b.spaces(), 4, BasisSide::K));
        let flip = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let pair = OperatorPair::new(Alpha, flip.clone(), flip.clone()).unwrap();
        let l = embed_cfree(&pair, &b).unwrap();
        let lam = crate::embeddings::embed_free(&flip, Alpha, &k).unwrap();
        let m = moment_data(&l, &lam, 4).unwrap();
        let expect: Vec<Complex64> = [0.0, 1.0, 0.0, 1.0].iter().map(|&x| Complex64::new(x, 0.0)).collect();
        for (got, want) in m.phi_moments.iter().zip(&expect) {
            assert!((got - want).norm() < 1e-15);
        }
        for (got, want) in m.psi_moments.iter().zip(&expect) {
            assert!((got - want).norm() < 1e-15);
        }
        let id = embed_cfree(&OperatorPair::identity(Beta, b.spaces()), &b).unwrap();
        let idk = crate::embeddings::embed_free(&CMatrix::identity(2), Beta, &k).unwrap();
        let ones = moment_data(&id, &idk, 3).unwrap();
        assert!(ones.phi_moments.iter().chain(&ones.psi_moments).all(|z| *z == ONE));
        assert!(matches!(moment_data(&l, &lam, 5), Err(Error::DepthExceeded { .. })));
    }

    #[test]
    fn moment_data_round_trips() {
        let m = MomentData::new(
            vec![Complex64::new(1.0, 0.5), Complex64::new(-2.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(3.0, -1.0)],
        )
        .unwrap();
        assert_eq!(MomentData::from_json(&m.to_json()).unwrap(), m);
        let csv = m.to_csv();
        assert_eq!(
            csv,
            "n,re_phi,im_phi,re_psi,im_psi\n1,1.0,0.5,0.0,0.0\n2,-2.0,0.0,3.0,-1.0\n"
        );
        assert!(MomentData::from_json(r#"{"order":3,"phi_moments":[],"psi_moments":[]}"#).is_err());
    }
}
