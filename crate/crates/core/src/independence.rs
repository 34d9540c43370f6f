//! Exhaustive word-level checkers for the five independence notions.
//!
//! Families are given as `[alpha_family, beta_family]`. Every alternating
//! sequence of generators up to `max_len` is evaluated by repeated
//! matrix-vector application, sharing suffixes through a depth-first walk.

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use crate::embeddings::{EmbeddedOperator, Provenance};
use crate::error::{Error, Result};
use crate::numkernel::{inner, CMatrix, CVector, ONE, ZERO};
use crate::report::CheckReport;
use crate::spaces::Index;

/// The second state of a c-free check.
#[derive(Debug, Clone)]
pub enum PsiState {
    /// Vector state at a unit vector of the common space.
    Vector(CVector),
    /// `⟨S η_ι, η_ι⟩` read from each generator's embedded pair: the K-side
    /// free-product state transported along the embedding.
    KSide,
}

/// A generator shifted by a scalar: `op − shift·I`.
struct Centered<'a> {
    op: &'a EmbeddedOperator,
    shift: Complex64,
    phi: Complex64,
    norm: f64,
}

impl Centered<'_> {
    fn apply(&self, v: &CVector) -> CVector {
        let mut out = self.op.matrix().apply(v);
        if self.shift != ZERO {
            out.axpy(-self.shift, v);
        }
        out
    }
}

type Families<'a> = [&'a [EmbeddedOperator]; 2];

fn common_len(families: &Families<'_>, vectors: &[&CVector]) -> Result<Option<usize>> {
    let mut ops = families.iter().flat_map(|f| f.iter());
    let Some(first) = ops.next() else {
        return Ok(None);
    };
    if ops.any(|op| !op.same_basis(first)) {
        return Err(Error::Precondition("families live on different bases".into()));
    }
    for v in vectors {
        if v.len() != first.len() {
            return Err(Error::DimensionMismatch {
                context: "state vector against family basis",
                expected: first.len(),
                found: v.len(),
            });
        }
    }
    Ok(Some(first.len()))
}

fn check_max_len(max_len: usize) -> Result<()> {
    if max_len < 2 {
        return Err(Error::Precondition("max_len must be at least 2".into()));
    }
    Ok(())
}

fn centered<'a>(
    families: &Families<'a>,
    phi_vec: &CVector,
    shift: impl Fn(&EmbeddedOperator) -> Result<Complex64>,
) -> Result<[Vec<Centered<'a>>; 2]> {
    let build = |family: &'a [EmbeddedOperator]| -> Result<Vec<Centered<'a>>> {
        family
            .iter()
            .map(|op| {
                let s = shift(op)?;
                let phi = inner(&op.matrix().apply(phi_vec), phi_vec)? - s;
                Ok(Centered {
                    op,
                    shift: s,
                    phi,
                    norm: op.norm_bound() + s.norm(),
                })
            })
            .collect()
    };
    Ok([build(families[0])?, build(families[1])?])
}

/// Word label: `(family index, member)` listed left to right.
type Word = Vec<(Index, usize)>;

fn word_json(word: &Word) -> serde_json::Value {
    json!(word.iter().map(|(i, m)| format!("{i}{m}")).collect::<Vec<_>>())
}

/// Walks every alternating word `g_1 ⋯ g_n` (2 ≤ n ≤ max_len) and calls
/// `visit(word, g_1⋯g_n·start, ∏φ(g_i), ∏(1+‖g_i‖))`. Top-level branches run
/// in parallel; results come back in deterministic order.
fn walk_alternating<T: Send>(
    fams: &[Vec<Centered<'_>>; 2],
    start: &CVector,
    max_len: usize,
    visit: &(dyn Fn(&Word, &CVector, Complex64, f64) -> T + Sync),
) -> Vec<T> {
    let roots: Vec<(Index, usize)> = Index::BOTH
        .iter()
        .flat_map(|&i| (0..fams[fam(i)].len()).map(move |m| (i, m)))
        .collect();
    roots
        .par_iter()
        .map(|&(i, m)| {
            let g = &fams[fam(i)][m];
            let mut out = Vec::new();
            let mut word = vec![(i, m)];
            recurse(fams, &g.apply(start), g.phi, 1.0 + g.norm, &mut word, max_len, visit, &mut out);
            out
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn fam(i: Index) -> usize {
    match i {
        Index::Alpha => 0,
        Index::Beta => 1,
    }
}

#[allow(clippy::too_many_arguments)]
fn recurse<T>(
    fams: &[Vec<Centered<'_>>; 2],
    v: &CVector,
    phi: Complex64,
    scale: f64,
    word: &mut Word,
    max_len: usize,
    visit: &(dyn Fn(&Word, &CVector, Complex64, f64) -> T + Sync),
    out: &mut Vec<T>,
) {
    if word.len() >= 2 {
        out.push(visit(word, v, phi, scale));
    }
    if word.len() == max_len {
        return;
    }
    // Words grow on the left: the new generator is applied last.
    let next = word[0].0.other();
    for (m, g) in fams[fam(next)].iter().enumerate() {
        word.insert(0, (next, m));
        recurse(fams, &g.apply(v), phi * g.phi, scale * (1.0 + g.norm), word, max_len, visit, out);
        word.remove(0);
    }
}

/// c-freeness: ψ-centered alternating words φ-factorize.
pub fn check_cfree(
    families: Families<'_>,
    xi: &CVector,
    psi: &PsiState,
    max_len: usize,
    tol: f64,
) -> Result<Vec<CheckReport>> {
    check_max_len(max_len)?;
    let psi_vec = match psi {
        PsiState::Vector(v) => Some(v),
        PsiState::KSide => None,
    };
    let mut vectors = vec![xi];
    vectors.extend(psi_vec);
    if common_len(&families, &vectors)?.is_none() {
        return Ok(Vec::new());
    }
    let fams = centered(&families, xi, |op| match psi {
        PsiState::Vector(v) => inner(&op.matrix().apply(v), v),
        PsiState::KSide => match op.provenance() {
            Provenance::CFree { pair } => Ok(pair.psi_value()),
            _ => Err(Error::Precondition(
                "K-side psi needs generators embedded from an operator pair".into(),
            )),
        },
    })?;
    Ok(walk_alternating(&fams, xi, max_len, &|word, v, phi, scale| {
        let lhs = inner_unchecked_ok(v, xi);
        CheckReport::compare("cfree_factorization", lhs, phi, scale, tol, json!({ "word": word_json(word) }))
    }))
}

fn inner_unchecked_ok(x: &CVector, y: &CVector) -> Complex64 {
    inner(x, y).expect("vectors share the family basis")
}

/// Freeness: centered alternating words have zero expectation.
pub fn check_free(
    families: Families<'_>,
    vacuum: &CVector,
    max_len: usize,
    tol: f64,
) -> Result<Vec<CheckReport>> {
    check_max_len(max_len)?;
    if common_len(&families, &[vacuum])?.is_none() {
        return Ok(Vec::new());
    }
    let fams = centered(&families, vacuum, |op| inner(&op.matrix().apply(vacuum), vacuum))?;
    Ok(walk_alternating(&fams, vacuum, max_len, &|word, v, _, scale| {
        let lhs = inner_unchecked_ok(v, vacuum);
        CheckReport::compare("free_centered_vanishing", lhs, ZERO, scale, tol, json!({ "word": word_json(word) }))
    }))
}

/// Boolean independence: alternating words factorize without centering.
pub fn check_boolean(
    families: Families<'_>,
    xi: &CVector,
    max_len: usize,
    tol: f64,
) -> Result<Vec<CheckReport>> {
    check_max_len(max_len)?;
    if common_len(&families, &[xi])?.is_none() {
        return Ok(Vec::new());
    }
    let fams = centered(&families, xi, |_| Ok(ZERO))?;
    Ok(walk_alternating(&fams, xi, max_len, &|word, v, phi, scale| {
        let lhs = inner_unchecked_ok(v, xi);
        CheckReport::compare("boolean_factorization", lhs, phi, scale, tol, json!({ "word": word_json(word) }))
    }))
}

/// The source matrix `T` acting on `H_ι` behind a monotone-family generator.
fn source_t(op: &EmbeddedOperator) -> Result<&CMatrix> {
    match op.provenance() {
        Provenance::Monotone { t, .. } | Provenance::Boolean { t, .. } => Ok(t),
        Provenance::CFree { pair } => Ok(&pair.t),
        _ => Err(Error::Precondition(
            "monotone evaluator needs generators with a source matrix".into(),
        )),
    }
}

/// `φ(a_1 ⋯ a_n)` by repeated removal of the first peak (ordering α < β),
/// merging neighbours that become adjacent with equal index.
pub fn monotone_moment(factors: &[(Index, CMatrix)]) -> Complex64 {
    let mut seq: Vec<(Index, CMatrix)> = Vec::with_capacity(factors.len());
    for (i, t) in factors {
        push_merged(&mut seq, *i, t.clone());
    }
    let mut scalar = ONE;
    while seq.len() > 1 {
        let n = seq.len();
        let p = (0..n)
            .find(|&p| {
                let up_from_left = p == 0 || seq[p - 1].0 < seq[p].0;
                let down_to_right = p == n - 1 || seq[p].0 > seq[p + 1].0;
                up_from_left && down_to_right
            })
            .expect("an alternating two-letter sequence always has a peak");
        scalar *= seq[p].1[(0, 0)];
        let rest = seq.split_off(p + 1);
        seq.pop();
        for (i, t) in rest {
            push_merged(&mut seq, i, t);
        }
    }
    seq.first().map_or(scalar, |(_, t)| scalar * t[(0, 0)])
}

fn push_merged(seq: &mut Vec<(Index, CMatrix)>, i: Index, t: CMatrix) {
    match seq.last_mut() {
        Some((j, prev)) if *j == i => {
            *prev = prev.matmul(&t).expect("same index, same dimension");
        }
        _ => seq.push((i, t)),
    }
}

/// Monotone independence: the direct moment of every alternating word equals
/// the peak-elimination value computed from the source matrices.
pub fn check_monotone(
    families: Families<'_>,
    xi: &CVector,
    max_len: usize,
    tol: f64,
) -> Result<Vec<CheckReport>> {
    check_max_len(max_len)?;
    if common_len(&families, &[xi])?.is_none() {
        return Ok(Vec::new());
    }
    let sources: [Vec<CMatrix>; 2] = [
        families[0].iter().map(|op| source_t(op).cloned()).collect::<Result<_>>()?,
        families[1].iter().map(|op| source_t(op).cloned()).collect::<Result<_>>()?,
    ];
    let fams = centered(&families, xi, |_| Ok(ZERO))?;
    Ok(walk_alternating(&fams, xi, max_len, &|word, v, _, scale| {
        let lhs = inner_unchecked_ok(v, xi);
        let factors: Vec<(Index, CMatrix)> = word
            .iter()
            .map(|&(i, m)| (i, sources[fam(i)][m].clone()))
            .collect();
        let rhs = monotone_moment(&factors);
        CheckReport::compare("monotone_peak_elimination", lhs, rhs, scale, tol, json!({ "word": word_json(word) }))
    }))
}

/// Orthogonality of the β-family to the α-family with respect to
/// `(φ at xi, ψ at psi_vec)`. `w_1`, `w_2` range over all products of
/// generators (either family, empty included) with
/// `len(w_1) + len(w_2) ≤ max_len − 3`.
pub fn check_orthogonal(
    families: Families<'_>,
    xi: &CVector,
    psi_vec: &CVector,
    max_len: usize,
    tol: f64,
) -> Result<Vec<CheckReport>> {
    if max_len < 3 {
        return Err(Error::Precondition("orthogonality checks need max_len >= 3".into()));
    }
    if common_len(&families, &[xi, psi_vec])?.is_none() {
        return Ok(Vec::new());
    }
    let gens: Vec<(Index, usize, &EmbeddedOperator)> = Index::BOTH
        .iter()
        .flat_map(|&i| families[fam(i)].iter().enumerate().map(move |(m, op)| (i, m, op)))
        .collect();
    let budget = max_len - 3;
    // (label, w_2 ξ) and (label, w_1^* ξ) for every word up to the budget.
    let right = word_vectors(&gens, xi, budget, false);
    let left = word_vectors(&gens, xi, budget, true);
    let alphas = families[0];
    let betas = families[1];
    let mut reports = Vec::new();

    // Condition (1): φ(b a_2) = 0 = φ(a_1 b).
    for (bm, b) in betas.iter().enumerate() {
        for (am, a) in alphas.iter().enumerate() {
            let scale = (1.0 + b.norm_bound()) * (1.0 + a.norm_bound());
            let ba = inner_unchecked_ok(&b.matrix().apply(&a.matrix().apply(xi)), xi);
            let ab = inner_unchecked_ok(&a.matrix().apply(&b.matrix().apply(xi)), xi);
            for (name, value) in [("orthogonal_phi_b_a", ba), ("orthogonal_phi_a_b", ab)] {
                reports.push(CheckReport::compare(name, value, ZERO, scale, tol, json!({ "a": am, "b": bm })));
            }
        }
    }

    // Condition (2).
    let psi_b: Vec<Complex64> = betas
        .iter()
        .map(|b| inner(&b.matrix().apply(psi_vec), psi_vec))
        .collect::<Result<_>>()?;
    for (w1_label, w1_star_xi, w1_scale) in &left {
        for (w2_label, w2_xi, w2_scale) in &right {
            if w1_label.len() + w2_label.len() > budget {
                continue;
            }
            for (a2m, a2) in alphas.iter().enumerate() {
                let a2w2 = a2.matrix().apply(w2_xi);
                let phi_a2w2 = inner_unchecked_ok(&a2w2, xi);
                for (a1m, a1) in alphas.iter().enumerate() {
                    let phi_w1a1 = inner_unchecked_ok(&a1.matrix().apply(xi), w1_star_xi);
                    let phi_w1a1a2w2 = inner_unchecked_ok(&a1.matrix().apply(&a2w2), w1_star_xi);
                    for (bm, b) in betas.iter().enumerate() {
                        let lhs = inner_unchecked_ok(&a1.matrix().apply(&b.matrix().apply(&a2w2)), w1_star_xi);
                        let rhs = psi_b[bm] * (phi_w1a1a2w2 - phi_w1a1 * phi_a2w2);
                        let scale = w1_scale
                            * w2_scale
                            * (1.0 + a1.norm_bound())
                            * (1.0 + a2.norm_bound())
                            * (1.0 + b.norm_bound());
                        reports.push(CheckReport::compare(
                            "orthogonal_w1_a1_b_a2_w2",
                            lhs,
                            rhs,
                            scale,
                            tol,
                            json!({
                                "w1": word_json(w1_label),
                                "w2": word_json(w2_label),
                                "a1": a1m, "b": bm, "a2": a2m,
                            }),
                        ));
                    }
                }
            }
        }
    }
    Ok(reports)
}

/// All generator products up to `max_len` factors applied to `start`: `w·start`
/// or, with `adjoint`, `w^*·start`. Labels list the word left to right.
fn word_vectors(
    gens: &[(Index, usize, &EmbeddedOperator)],
    start: &CVector,
    max_len: usize,
    adjoint: bool,
) -> Vec<(Word, CVector, f64)> {
    let mut out = vec![(Vec::new(), start.clone(), 1.0)];
    let mut frontier = 0;
    for _ in 0..max_len {
        let end = out.len();
        for k in frontier..end {
            for &(i, m, op) in gens {
                let (label, v, scale) = &out[k];
                let (new_label, new_v) = if adjoint {
                    // (w g)^* = g^* w^*: extend on the right.
                    let mut l = label.clone();
                    l.push((i, m));
                    (l, op.matrix().apply_adjoint(v))
                } else {
                    // g w: extend on the left.
                    let mut l = vec![(i, m)];
                    l.extend_from_slice(label);
                    (l, op.matrix().apply(v))
                };
                let s = scale * (1.0 + op.norm_bound());
                out.push((new_label, new_v, s));
            }
        }
        frontier = end;
    }
    out
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::embeddings::{embed_boolean, embed_cfree, embed_free, embed_monotone, embed_orthogonal, OperatorPair};
    use crate::random::{random_pair, random_self_adjoint, trial_rng};
    use crate::report::Summary;
    use crate::spaces::{build_product_basis, BasisSide, BasisWord, FourSpaces, ProductBasis};
    use Index::{Alpha, Beta};

    fn basis(dims: [usize; 4], depth: usize, side: BasisSide) -> Arc<ProductBasis> {
        Arc::new(build_product_basis(FourSpaces::from_dims(dims).unwrap(), depth, side))
    }

    #[test]
    fn monotone_evaluator_examples() {
        let t = |x: f64| CMatrix::from_real_rows(&[&[x]]).unwrap();
        // Peak at p = 1 with κ_1 > κ_2.
        assert_eq!(monotone_moment(&[(Beta, t(2.0)), (Alpha, t(3.0))]), Complex64::new(6.0, 0.0));
        // α β α: the β in the middle is the peak; α factors merge afterwards.
        let a1 = CMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let a2 = CMatrix::from_real_rows(&[&[0.5, -1.0], &[2.0, 0.0]]).unwrap();
        let v = monotone_moment(&[(Alpha, a1.clone()), (Beta, t(5.0)), (Alpha, a2.clone())]);
        let merged = a1.matmul(&a2).unwrap()[(0, 0)];
        assert_eq!(v, Complex64::new(5.0, 0.0) * merged);
    }

    #[test]
    fn free_families_pass_and_same_side_control_fails() {
        let k = basis([2, 3, 2, 3], 4, BasisSide::K);
        let mut rng = trial_rng(21, 0);
        let fa: Vec<_> = (0..2).map(|_| embed_free(&random_self_adjoint(3, &mut rng), Alpha, &k).unwrap()).collect();
        let fb: Vec<_> = (0..2).map(|_| embed_free(&random_self_adjoint(3, &mut rng), Beta, &k).unwrap()).collect();
        let eta = k.distinguished_vector();
        let reports = check_free([&fa, &fb], &eta, 4, 1e-12).unwrap();
        // 4 roots, two continuations per step: lengths 2, 3, 4.
        assert_eq!(reports.len(), 8 + 16 + 32);
        assert!(Summary::of(&reports).pass());
        let bad = check_free([&fa, &fa], &eta, 4, 1e-12).unwrap();
        assert!(bad.iter().any(|r| r.abs_err > 1e-10));
    }

    #[test]
    fn cfree_families_pass_at_kside_state() {
        let h = basis([3, 3, 3, 3], 4, BasisSide::H);
        let mut rng = trial_rng(4, 2);
        let fa: Vec<_> = (0..2).map(|_| embed_cfree(&random_pair(Alpha, h.spaces(), &mut rng), &h).unwrap()).collect();
        let fb: Vec<_> = (0..2).map(|_| embed_cfree(&random_pair(Beta, h.spaces(), &mut rng), &h).unwrap()).collect();
        let xi = h.distinguished_vector();
        let reports = check_cfree([&fa, &fb], &xi, &PsiState::KSide, 4, 1e-12).unwrap();
        assert!(Summary::of(&reports).pass(), "{:?}", reports.iter().find(|r| !r.pass));
        let bad = check_cfree([&fa, &fa], &xi, &PsiState::KSide, 4, 1e-12).unwrap();
        assert!(bad.iter().any(|r| r.abs_err > 1e-10));
    }

    #[test]
    fn scalar_families_pass_trivially() {
        let h = basis([2, 2, 2, 2], 3, BasisSide::H);
        let s = h.spaces();
        let sc = |i: Index, c: f64| embed_cfree(&OperatorPair::identity(i, s).scale(Complex64::new(c, 0.0)), &h).unwrap();
        let fa = vec![sc(Alpha, 2.0)];
        let fb = vec![sc(Beta, -0.5)];
        let xi = h.distinguished_vector();
        let reports = check_cfree([&fa, &fb], &xi, &PsiState::Vector(xi.clone()), 3, 1e-14).unwrap();
        assert!(reports.iter().all(|r| r.pass && r.lhs == ZERO));
    }

    #[test]
    fn degenerate_and_direct_embeddings_give_identical_reports() {
        let mut rng = trial_rng(8, 0);
        let one = CMatrix::zeros(1, 1);
        // Boolean.
        let b = basis([3, 1, 3, 1], 3, BasisSide::H);
        let (ta, tb) = (random_self_adjoint(3, &mut rng), random_self_adjoint(3, &mut rng));
        let deg = [
            vec![embed_cfree(&OperatorPair::new(Alpha, ta.clone(), one.clone()).unwrap(), &b).unwrap()],
            vec![embed_cfree(&OperatorPair::new(Beta, tb.clone(), one.clone()).unwrap(), &b).unwrap()],
        ];
        let dir = [vec![embed_boolean(&ta, Alpha, &b).unwrap()], vec![embed_boolean(&tb, Beta, &b).unwrap()]];
        let xi = b.distinguished_vector();
        let r1 = check_boolean([&deg[0], &deg[1]], &xi, 5, 1e-12).unwrap();
        let r2 = check_boolean([&dir[0], &dir[1]], &xi, 5, 1e-12).unwrap();
        assert!(Summary::of(&r1).pass());
        for (x, y) in r1.iter().zip(&r2) {
            assert!((x.lhs - y.lhs).norm() <= 1e-12 && x.pass == y.pass);
        }
        // Monotone.
        let m = basis([3, 1, 3, 3], 2, BasisSide::H);
        let deg = [
            vec![embed_cfree(&OperatorPair::new(Alpha, ta.clone(), one.clone()).unwrap(), &m).unwrap()],
            vec![embed_cfree(&OperatorPair::new(Beta, tb.clone(), tb.clone()).unwrap(), &m).unwrap()],
        ];
        let dir = [vec![embed_monotone(&ta, Alpha, &m).unwrap()], vec![embed_monotone(&tb, Beta, &m).unwrap()]];
        let xi = m.distinguished_vector();
        let r1 = check_monotone([&deg[0], &deg[1]], &xi, 5, 1e-12).unwrap();
        let r2 = check_monotone([&dir[0], &dir[1]], &xi, 5, 1e-12).unwrap();
        assert!(Summary::of(&r1).pass(), "{:?}", r1.iter().find(|r| !r.pass));
        for (x, y) in r1.iter().zip(&r2) {
            assert!((x.lhs - y.lhs).norm() <= 1e-12 && x.pass == y.pass);
        }
        // Orthogonal, ψ at h_α^o.
        let o = basis([3, 1, 1, 3], 2, BasisSide::H);
        let psi = o.unit_vector(&BasisWord::bare(Alpha, 1)).unwrap();
        let deg = [
            vec![embed_cfree(&OperatorPair::new(Alpha, ta.clone(), one.clone()).unwrap(), &o).unwrap()],
            vec![embed_cfree(&OperatorPair::new(Beta, one.clone(), tb.clone()).unwrap(), &o).unwrap()],
        ];
        let dir = [vec![embed_orthogonal(&ta, Alpha, &o).unwrap()], vec![embed_orthogonal(&tb, Beta, &o).unwrap()]];
        let xi = o.distinguished_vector();
        let r1 = check_orthogonal([&deg[0], &deg[1]], &xi, &psi, 5, 1e-12).unwrap();
        let r2 = check_orthogonal([&dir[0], &dir[1]], &xi, &psi, 5, 1e-12).unwrap();
        assert!(Summary::of(&r1).pass(), "{:?}", r1.iter().find(|r| !r.pass));
        assert_eq!(r1.len(), r2.len());
        for (x, y) in r1.iter().zip(&r2) {
            assert!((x.lhs - y.lhs).norm() <= 1e-12 && x.pass == y.pass);
        }
    }

    #[test]
    fn mismatched_bases_are_rejected() {
        let h1 = basis([2, 2, 2, 2], 2, BasisSide::H);
        let h2 = basis([2, 2, 2, 3], 2, BasisSide::H);
        let fa = vec![EmbeddedOperator::identity(&h1)];
        let fb = vec![EmbeddedOperator::identity(&h2)];
        assert!(check_boolean([&fa, &fb], &h1.distinguished_vector(), 3, 1e-9).is_err());
        assert!(check_free([&fa, &fa], &h1.distinguished_vector(), 1, 1e-9).is_err());
    }

    #[test]
    fn empty_families_give_no_reports() {
        let h = basis([1, 1, 1, 1], 3, BasisSide::H);
        let xi = h.distinguished_vector();
        assert!(check_free([&[], &[]], &xi, 3, 1e-9).unwrap().is_empty());
    }
}
