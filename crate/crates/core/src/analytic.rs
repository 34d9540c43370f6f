//! Resolvent evaluation of `h, h̃, k, k̃` at complex points, Newton inversion
//! of `k`, and point checks of the centered-resolvent lemma, the `h̃_{a+b}`
//! identity and the linearization identity.
//!
//! An element carries two realizations: the φ-side operator with its state
//! vector, and the ψ-side operator with its state vector. In the operator
//! model these are `Λ` on the H-side basis at `ξ` and `λ` on the K-side basis
//! at `η`; for free-copy realizations both sides share one operator and use
//! `ξ` and `η̃`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::embeddings::{embed_cfree, embed_free, EmbeddedOperator, OperatorPair};
use crate::error::{Error, Result};
use crate::numkernel::json::complex;
use crate::numkernel::{inner, solve, CVector, LinearOp, ScaledSum, SolveOptions, ONE, ZERO};
use crate::report::CheckReport;
use crate::spaces::{BasisSide, ProductBasis};
use crate::states::UNIT_TOL;

/// Resolvents are refused for `|t| ≥ RESOLVENT_GUARD / ‖a‖`.
pub const RESOLVENT_GUARD: f64 = 0.99;
pub const NEWTON_MAX_ITERATIONS: usize = 100;
/// Below this `|z|` the continuous extension `R(0) = φ(a)` is used.
pub const R_ORIGIN_CUTOFF: f64 = 1e-8;
/// Non-vanishing threshold for `h_a, h_b, h_a + h_b − 1`.
pub const NONVANISHING_TOL: f64 = 1e-10;

/// An operator together with the unit vector defining its vector state.
#[derive(Debug, Clone)]
pub struct Realization {
    op: EmbeddedOperator,
    vector: CVector,
}

impl Realization {
    pub fn new(op: EmbeddedOperator, vector: CVector) -> Result<Self> {
        if vector.len() != op.len() {
            return Err(Error::DimensionMismatch {
                context: "state vector against operator",
                expected: op.len(),
                found: vector.len(),
            });
        }
        let norm = vector.norm();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NonUnitVector { norm });
        }
        Ok(Realization { op, vector })
    }

    pub fn op(&self) -> &EmbeddedOperator {
        &self.op
    }

    pub fn vector(&self) -> &CVector {
        &self.vector
    }

    fn compatible(&self, other: &Realization) -> bool {
        self.op.same_basis(&other.op) && self.vector.max_abs_diff(&other.vector) == 0.0
    }
}

/// An element `a` with its φ-side and ψ-side realizations.
#[derive(Debug, Clone)]
pub struct TwoStateElement {
    phi: Realization,
    psi: Realization,
    norm_bound: f64,
}

impl TwoStateElement {
    pub fn new(phi: Realization, psi: Realization) -> Self {
        let norm_bound = phi.op.norm_bound().max(psi.op.norm_bound());
        TwoStateElement { phi, psi, norm_bound }
    }

    /// `Λ_(T,S)` at `ξ` on the H-side basis and `λ(S)` at `η` on the K-side basis.
    pub fn from_cfree_pair(
        pair: &OperatorPair,
        h_basis: &Arc<ProductBasis>,
        k_basis: &Arc<ProductBasis>,
    ) -> Result<Self> {
        if k_basis.side() != BasisSide::K {
            return Err(Error::WrongBasisSide { expected: "K" });
        }
        let phi = Realization::new(embed_cfree(pair, h_basis)?, h_basis.distinguished_vector())?;
        let psi = Realization::new(
            embed_free(&pair.s, pair.index, k_basis)?,
            k_basis.distinguished_vector(),
        )?;
        Ok(Self::new(phi, psi))
    }

    /// One operator with two state vectors.
    pub fn on_one_space(op: EmbeddedOperator, phi_vector: CVector, psi_vector: CVector) -> Result<Self> {
        let phi = Realization::new(op.clone(), phi_vector)?;
        let psi = Realization::new(op, psi_vector)?;
        Ok(Self::new(phi, psi))
    }

    pub fn phi(&self) -> &Realization {
        &self.phi
    }

    pub fn psi(&self) -> &Realization {
        &self.psi
    }

    /// Upper bound on `‖a‖` used by the domain guards.
    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    /// `a + b` realized on the shared spaces of both sides.
    pub fn sum(&self, other: &TwoStateElement) -> Result<TwoStateElement> {
        if !self.phi.compatible(&other.phi) || !self.psi.compatible(&other.psi) {
            return Err(Error::Precondition("sum needs elements on common spaces and vectors".into()));
        }
        let phi = Realization::new(self.phi.op.add(&other.phi.op)?, self.phi.vector.clone())?;
        let psi = Realization::new(self.psi.op.add(&other.psi.op)?, self.psi.vector.clone())?;
        let mut out = TwoStateElement::new(phi, psi);
        out.norm_bound = out.norm_bound.min(self.norm_bound + other.norm_bound);
        Ok(out)
    }

    /// `φ(a)`.
    pub fn phi_mean(&self) -> Result<Complex64> {
        inner(&self.phi.op.apply(&self.phi.vector)?, &self.phi.vector)
    }

    fn guard(&self, t: Complex64) -> Result<()> {
        if self.norm_bound > 0.0 && t.norm() * self.norm_bound >= RESOLVENT_GUARD {
            return Err(Error::Domain(format!(
                "|t| = {} outside the guarded disk of radius {}",
                t.norm(),
                RESOLVENT_GUARD / self.norm_bound
            )));
        }
        Ok(())
    }
}

/// `k` (ψ-side) or `k̃` (φ-side).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KFunction {
    K,
    KTilde,
}

fn solve_opts() -> SolveOptions {
    SolveOptions::default()
}

/// `(1 − t·op)^{-1} x`.
fn resolvent_apply(op: &EmbeddedOperator, t: Complex64, x: &[Complex64]) -> Result<CVector> {
    let system = ScaledSum::new(op.len(), ONE).term(-t, vec![op as &dyn LinearOp]);
    solve(&system, x, solve_opts())
}

fn resolvent_state(r: &Realization, t: Complex64) -> Result<Complex64> {
    let x = resolvent_apply(&r.op, t, &r.vector)?;
    inner(&x, &r.vector)
}

/// `h_a(t) = ψ((1 − ta)^{-1})`.
pub fn h(elem: &TwoStateElement, t: Complex64) -> Result<Complex64> {
    elem.guard(t)?;
    resolvent_state(&elem.psi, t)
}

/// `h̃_a(t) = φ((1 − ta)^{-1})`.
pub fn h_tilde(elem: &TwoStateElement, t: Complex64) -> Result<Complex64> {
    elem.guard(t)?;
    resolvent_state(&elem.phi, t)
}

pub fn k(elem: &TwoStateElement, t: Complex64) -> Result<Complex64> {
    Ok(t * h(elem, t)?)
}

pub fn k_tilde(elem: &TwoStateElement, t: Complex64) -> Result<Complex64> {
    Ok(t * h_tilde(elem, t)?)
}

fn side(elem: &TwoStateElement, which: KFunction) -> &Realization {
    match which {
        KFunction::K => &elem.psi,
        KFunction::KTilde => &elem.phi,
    }
}

/// `(k(t), k'(t))` with `h'(t) = ⟨R a R v, v⟩`, `R = (1 − ta)^{-1}`.
fn k_and_derivative(elem: &TwoStateElement, which: KFunction, t: Complex64) -> Result<(Complex64, Complex64)> {
    elem.guard(t)?;
    let r = side(elem, which);
    let x = resolvent_apply(&r.op, t, &r.vector)?;
    let hv = inner(&x, &r.vector)?;
    let y = resolvent_apply(&r.op, t, &r.op.apply(&x)?)?;
    let dh = inner(&y, &r.vector)?;
    Ok((t * hv, hv + t * dh))
}

/// `t` with `k(t) = z`, by damped Newton iteration from `t₀ = z`.
pub fn k_inverse_numeric(elem: &TwoStateElement, z: Complex64, which: KFunction) -> Result<Complex64> {
    if elem.norm_bound > 0.0 && 6.0 * z.norm() * elem.norm_bound >= 1.0 {
        return Err(Error::Domain(format!(
            "|z| = {} outside the inversion disk of radius {}",
            z.norm(),
            1.0 / (6.0 * elem.norm_bound)
        )));
    }
    // Iterate to near machine precision; accept anything within `target`.
    let converged = 4.0 * f64::EPSILON * (1.0 + z.norm());
    let target = 1e-12;
    let mut t = z;
    let (mut kt, mut dk) = k_and_derivative(elem, which, t)?;
    let mut residual = (kt - z).norm();
    for _ in 0..NEWTON_MAX_ITERATIONS {
        if residual <= converged {
            return Ok(t);
        }
        let mut step = (kt - z) / dk;
        let mut accepted = false;
        for _ in 0..60 {
            let candidate = t - step;
            if let Ok((kc, dkc)) = k_and_derivative(elem, which, candidate) {
                let rc = (kc - z).norm();
                if rc < residual {
                    t = candidate;
                    kt = kc;
                    dk = dkc;
                    residual = rc;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if residual <= target {
        return Ok(t);
    }
    Err(Error::NonConvergence {
        iterations: NEWTON_MAX_ITERATIONS,
        residual,
    })
}

/// `R(z) = 1/k^{-1}(z) − 1/k̃(k^{-1}(z))`, with `R(0) = φ(a)` near the origin.
pub fn cfree_r_at(elem: &TwoStateElement, z: Complex64) -> Result<Complex64> {
    if z.norm() <= R_ORIGIN_CUTOFF {
        return elem.phi_mean();
    }
    let t = k_inverse_numeric(elem, z, KFunction::K)?;
    Ok(ONE / t - ONE / k_tilde(elem, t)?)
}

/// Largest `ρ` allowed by the bound `‖ρ a(t₁) b(t₂)‖ ≤ |ρ|·A·B < 1`, where
/// `A = |t₁|‖a‖/(1 − |t₁|‖a‖) + |h_a(t₁) − 1|` bounds `‖a(t₁)‖`.
pub fn rho_bound(
    elem_a: &TwoStateElement,
    elem_b: &TwoStateElement,
    t1: Complex64,
    t2: Complex64,
) -> Result<f64> {
    let centered_norm = |e: &TwoStateElement, t: Complex64| -> Result<f64> {
        let x = t.norm() * e.norm_bound;
        Ok(x / (1.0 - x) + (h(e, t)? - ONE).norm())
    };
    let product = centered_norm(elem_a, t1)? * centered_norm(elem_b, t2)?;
    Ok(if product == 0.0 { f64::INFINITY } else { 1.0 / product })
}

fn check_quarter_disk(elem: &TwoStateElement, t: Complex64, name: &str) -> Result<()> {
    if elem.norm_bound > 0.0 && 4.0 * t.norm() * elem.norm_bound >= 1.0 {
        return Err(Error::Domain(format!("|{name}| = {} not below 1/(4‖·‖)", t.norm())));
    }
    Ok(())
}

fn common_phi(elem_a: &TwoStateElement, elem_b: &TwoStateElement) -> Result<()> {
    if !elem_a.phi.compatible(&elem_b.phi) {
        return Err(Error::Precondition("elements need a common phi-side space and vector".into()));
    }
    Ok(())
}

/// `a(t)x = (1 − ta)^{-1}x − h_a(t)x`.
fn centered_resolvent_apply(op: &EmbeddedOperator, t: Complex64, h_value: Complex64, x: &[Complex64]) -> Result<CVector> {
    let mut y = resolvent_apply(op, t, x)?;
    y.axpy(-h_value, &CVector::new(x.to_vec()));
    Ok(y)
}

/// The centered-resolvent lemma at `(t₁, t₂, ρ)`:
/// part 1 (`ψ(a(t₁)) = ψ(b(t₂)) = 0` and the φ-factorization of
/// `a(t₁)b(t₂)`), part 2 (the product expansion with `c₀..c₃`, checked on
/// `ξ`), and part 3 (the value of `φ((c₀ + c₁a + c₂b + c₃ab)^{-1})`).
pub fn check_centered_resolvent_identity(
    elem_a: &TwoStateElement,
    elem_b: &TwoStateElement,
    t1: Complex64,
    t2: Complex64,
    rho: Complex64,
    tol: f64,
) -> Result<Vec<CheckReport>> {
    common_phi(elem_a, elem_b)?;
    check_quarter_disk(elem_a, t1, "t1")?;
    check_quarter_disk(elem_b, t2, "t2")?;
    let bound = rho_bound(elem_a, elem_b, t1, t2)?;
    if rho.norm() >= bound {
        return Err(Error::Precondition(format!(
            "|rho| = {} not below the invertibility bound {bound}",
            rho.norm()
        )));
    }
    let ctx = json!({
        "t1": [t1.re, t1.im], "t2": [t2.re, t2.im], "rho": [rho.re, rho.im],
    });
    let ha = h(elem_a, t1)?;
    let hb = h(elem_b, t2)?;
    let hta = h_tilde(elem_a, t1)?;
    let htb = h_tilde(elem_b, t2)?;
    let (a, b) = (&elem_a.phi.op, &elem_b.phi.op);
    let xi = &elem_a.phi.vector;
    let mut reports = Vec::new();

    // Part 1.
    for (name, e, t, hv) in [("psi_centered_a", elem_a, t1, ha), ("psi_centered_b", elem_b, t2, hb)] {
        let u = centered_resolvent_apply(&e.psi.op, t, hv, &e.psi.vector)?;
        let value = inner(&u, &e.psi.vector)?;
        reports.push(CheckReport::gap(name, value.norm(), 1.0 + hv.norm(), tol, ctx.clone()));
    }
    let bx = centered_resolvent_apply(b, t2, hb, xi)?;
    let abx = centered_resolvent_apply(a, t1, ha, &bx)?;
    let joint = inner(&abx, xi)?;
    let factored = (hta - ha) * (htb - hb);
    reports.push(CheckReport::compare(
        "phi_factorization_centered_resolvents",
        joint,
        factored,
        1.0 + factored.norm(),
        tol,
        ctx.clone(),
    ));

    // Part 2.
    let c0 = ONE - rho * (ha - ONE) * (hb - ONE);
    let c1 = -t1 * (ONE + rho * ha - rho * ha * hb);
    let c2 = -t2 * (ONE + rho * hb - rho * ha * hb);
    let c3 = t1 * t2 * (ONE - rho * ha * hb);
    let n = a.len();
    let quad = ScaledSum::new(n, c0)
        .term(c1, vec![a as &dyn LinearOp])
        .term(c2, vec![b as &dyn LinearOp])
        .term(c3, vec![a as &dyn LinearOp, b as &dyn LinearOp]);
    let expanded = quad.apply(xi);
    let one_minus_t2b = ScaledSum::new(n, ONE).term(-t2, vec![b as &dyn LinearOp]);
    let one_minus_t1a = ScaledSum::new(n, ONE).term(-t1, vec![a as &dyn LinearOp]);
    let v = one_minus_t2b.apply(xi);
    let bv = centered_resolvent_apply(b, t2, hb, &v)?;
    let abv = centered_resolvent_apply(a, t1, ha, &bv)?;
    let mut w = v.clone();
    w.axpy(-rho, &abv);
    let factored_vec = one_minus_t1a.apply(&w);
    reports.push(CheckReport::gap(
        "product_expansion_c0_c3",
        factored_vec.max_abs_diff(&expanded),
        1.0 + expanded.max_abs(),
        tol,
        {
            let mut with_c = ctx.clone();
            with_c["c"] = json!([[c0.re, c0.im], [c1.re, c1.im], [c2.re, c2.im], [c3.re, c3.im]]);
            with_c
        },
    ));

    // Part 3.
    let x = solve(&quad, xi, solve_opts())?;
    let lhs = inner(&x, xi)?;
    let rhs = hta * htb / (ONE - rho * (hta - ha) * (htb - hb));
    reports.push(CheckReport::compare(
        "centered_resolvent_identity",
        lhs,
        rhs,
        1.0 + rhs.norm(),
        tol,
        ctx,
    ));
    Ok(reports)
}

/// The `h̃_{a+b}` identity at `t₁`, with `t₂` solved from `k_b(t₂) = k_a(t₁)`.
pub fn check_htilde_sum_identity(
    elem_a: &TwoStateElement,
    elem_b: &TwoStateElement,
    t1: Complex64,
    tol: f64,
) -> Result<Vec<CheckReport>> {
    common_phi(elem_a, elem_b)?;
    check_quarter_disk(elem_a, t1, "t1")?;
    let z = k(elem_a, t1)?;
    let t2 = k_inverse_numeric(elem_b, z, KFunction::K)?;
    check_quarter_disk(elem_b, t2, "t2")?;
    let ha = h(elem_a, t1)?;
    let hb = h(elem_b, t2)?;
    let hta = h_tilde(elem_a, t1)?;
    let htb = h_tilde(elem_b, t2)?;
    let denom = ha + hb - ONE;
    let ctx = json!({ "t1": [t1.re, t1.im], "t2": [t2.re, t2.im] });
    let mut reports = vec![
        CheckReport::compare("hypothesis_t1_ha_eq_t2_hb", t1 * ha, t2 * hb, 1.0 + z.norm(), 1e-12, ctx.clone()),
        CheckReport::condition(
            "nonvanishing_ha_hb_sum",
            ha.norm() > NONVANISHING_TOL && hb.norm() > NONVANISHING_TOL && denom.norm() > NONVANISHING_TOL,
            json!({ "ha": [ha.re, ha.im], "hb": [hb.re, hb.im], "ha_plus_hb_minus_1": [denom.re, denom.im] }),
        ),
    ];
    if denom.norm() <= NONVANISHING_TOL {
        return Err(Error::Precondition("h_a(t1) + h_b(t2) - 1 vanishes".into()));
    }
    let t = t1 * ha / denom;
    let sum = elem_a.sum(elem_b).or_else(|_| {
        // Only the φ side of `a + b` is needed here.
        let phi = Realization::new(elem_a.phi.op.add(&elem_b.phi.op)?, elem_a.phi.vector.clone())?;
        Ok::<_, Error>(TwoStateElement::new(phi.clone(), phi))
    })?;
    let sum_bound = elem_a.norm_bound + elem_b.norm_bound;
    reports.push(CheckReport::condition(
        "t_in_sum_disk",
        t.norm() * sum_bound < 1.0,
        json!({ "t": [t.re, t.im], "norm_bound_sum": sum_bound }),
    ));
    let lhs = h_tilde(&sum, t)?;
    let rhs = denom * hta * htb / (ha * htb + hb * hta - hta * htb);
    reports.push(CheckReport::compare(
        "htilde_sum_identity",
        lhs,
        rhs,
        1.0 + rhs.norm(),
        tol,
        ctx,
    ));
    Ok(reports)
}

/// One evaluation point of the analytic linearization check.
#[derive(Debug, Clone, Serialize)]
pub struct LinearizationTrace {
    #[serde(with = "complex")]
    pub z: Complex64,
    #[serde(with = "complex")]
    pub t1: Complex64,
    #[serde(with = "complex")]
    pub t2: Complex64,
    #[serde(with = "complex")]
    pub t3: Complex64,
    #[serde(with = "complex")]
    pub t: Complex64,
    pub residual: f64,
    pub t_gap: f64,
}

/// `(1/t₃)(1 − 1/h̃_{a+b}(t₃)) = Σ (1/tᵢ)(1 − 1/h̃(tᵢ))` at `z`, plus the
/// separate gap `|t − t₃|` of the ψ-freeness step.
pub fn check_linearization_analytic(
    elem_a: &TwoStateElement,
    elem_b: &TwoStateElement,
    elem_sum: &TwoStateElement,
    z: Complex64,
    tol: f64,
    t_tol: f64,
) -> Result<(Vec<CheckReport>, LinearizationTrace)> {
    if z == ZERO {
        return Err(Error::Domain("linearization check needs z != 0".into()));
    }
    let t1 = k_inverse_numeric(elem_a, z, KFunction::K)?;
    let t2 = k_inverse_numeric(elem_b, z, KFunction::K)?;
    let t3 = k_inverse_numeric(elem_sum, z, KFunction::K)?;
    let term = |e: &TwoStateElement, t: Complex64| -> Result<Complex64> {
        Ok((ONE - ONE / h_tilde(e, t)?) / t)
    };
    let lhs = term(elem_sum, t3)?;
    let rhs = term(elem_a, t1)? + term(elem_b, t2)?;
    let ha = h(elem_a, t1)?;
    let hb = h(elem_b, t2)?;
    let t = t1 * ha / (ha + hb - ONE);
    let ctx = json!({
        "z": [z.re, z.im], "t1": [t1.re, t1.im], "t2": [t2.re, t2.im],
        "t3": [t3.re, t3.im], "t": [t.re, t.im],
    });
    let main = CheckReport::compare("linearization_analytic", lhs, rhs, 1.0 + rhs.norm(), tol, ctx.clone());
    let step = CheckReport::compare("psi_free_step_t_eq_t3", t, t3, 1.0 + t3.norm(), t_tol, ctx);
    let trace = LinearizationTrace {
        z,
        t1,
        t2,
        t3,
        t,
        residual: main.abs_err,
        t_gap: step.abs_err,
    };
    Ok((vec![main, step], trace))
}

/// `z, t1, t2, t3, t, residual, t_gap` as CSV, complex values split into
/// real and imaginary columns.
pub fn trace_csv(rows: &[LinearizationTrace]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "re_z", "im_z", "re_t1", "im_t1", "re_t2", "im_t2", "re_t3", "im_t3", "re_t", "im_t", "residual", "t_gap",
    ])
    .expect("in-memory write");
    for r in rows {
        let mut fields: Vec<String> = [r.z, r.t1, r.t2, r.t3, r.t]
            .iter()
            .flat_map(|c| [c.re.to_string(), c.im.to_string()])
            .collect();
        fields.push(r.residual.to_string());
        fields.push(r.t_gap.to_string());
        w.write_record(&fields).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::CMatrix;
    use crate::random::{random_pair, trial_rng};
    use crate::spaces::{build_product_basis, FourSpaces, Index};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn bases(dims: [usize; 4], depth: usize) -> (Arc<ProductBasis>, Arc<ProductBasis>) {
        let spaces = FourSpaces::from_dims(dims).unwrap();
        (
            Arc::new(build_product_basis(spaces, depth, BasisSide::H)),
            Arc::new(build_product_basis(spaces, depth, BasisSide::K)),
        )
    }

    fn flip() -> CMatrix {
        CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    fn flip_element(depth: usize) -> TwoStateElement {
        let (hb, kb) = bases([2, 2, 2, 2], depth);
        let pair = OperatorPair::new(Index::Alpha, flip(), flip()).unwrap();
        TwoStateElement::from_cfree_pair(&pair, &hb, &kb).unwrap()
    }

    #[test]
    fn resolvent_examples() {
        let e = flip_element(12);
        assert_eq!(h(&e, ZERO).unwrap(), ONE);
        let t = Complex64::new(0.3, 0.1);
        // α-only words on a flip truncate at depth 12; tail ≈ |t|^14.
        let exact = ONE / (ONE - t * t);
        assert!((h(&e, t).unwrap() - exact).norm() < 1e-7);
        assert!((h_tilde(&e, t).unwrap() - exact).norm() < 1e-7);
        assert!(h(&e, c(0.995)).is_err());

        let (hb, kb) = bases([2, 2, 2, 2], 3);
        let zero = OperatorPair::zero(Index::Beta, hb.spaces());
        let z = TwoStateElement::from_cfree_pair(&zero, &hb, &kb).unwrap();
        assert_eq!(h(&z, c(5.0)).unwrap(), ONE);
        assert_eq!(k(&z, c(0.25)).unwrap(), c(0.25));
    }

    #[test]
    fn newton_inversion_examples() {
        let e = flip_element(16);
        assert_eq!(k_inverse_numeric(&e, ZERO, KFunction::K).unwrap(), ZERO);
        let t = k_inverse_numeric(&e, c(0.1), KFunction::K).unwrap();
        // Root of t/(1 − t²) = 0.1: t = (−1 + √1.04)/0.2.
        let oracle = (-1.0 + 1.04f64.sqrt()) / 0.2;
        assert!((t - c(oracle)).norm() < 1e-12);
        assert!((t.re - 0.0990195).abs() < 1e-7);
        assert!(k_inverse_numeric(&e, c(0.2), KFunction::K).is_err());
    }

    #[test]
    fn r_at_origin_is_phi_mean() {
        let (hb, kb) = bases([3, 3, 3, 3], 4);
        let pair = random_pair(Index::Alpha, hb.spaces(), &mut trial_rng(11, 0));
        let e = TwoStateElement::from_cfree_pair(&pair, &hb, &kb).unwrap();
        assert!((cfree_r_at(&e, ZERO).unwrap() - pair.phi_value()).norm() < 1e-12);
        let near = cfree_r_at(&e, c(1e-6)).unwrap();
        assert!((near - pair.phi_value()).norm() < 1e-5);
    }

    #[test]
    fn centered_resolvent_trivial_cases() {
        let (hb, kb) = bases([3, 3, 3, 3], 8);
        let mut rng = trial_rng(3, 1);
        let a = TwoStateElement::from_cfree_pair(&random_pair(Index::Alpha, hb.spaces(), &mut rng), &hb, &kb).unwrap();
        let b = TwoStateElement::from_cfree_pair(&random_pair(Index::Beta, hb.spaces(), &mut rng), &hb, &kb).unwrap();
        let reports = check_centered_resolvent_identity(&a, &b, ZERO, ZERO, c(0.3), 1e-9).unwrap();
        assert!(reports.iter().all(|r| r.pass));
        assert!((reports.last().unwrap().lhs - ONE).norm() < 1e-15);
        let reports = check_centered_resolvent_identity(&a, &b, c(0.1), Complex64::new(0.0, 0.1), ZERO, 1e-9).unwrap();
        assert!(reports.iter().all(|r| r.pass), "{reports:?}");
        assert!(check_centered_resolvent_identity(&a, &b, c(0.3), ZERO, ZERO, 1e-9).is_err());
    }

    #[test]
    fn htilde_sum_collapses_for_zero_b() {
        let (hb, kb) = bases([3, 3, 3, 3], 8);
        let a = TwoStateElement::from_cfree_pair(&random_pair(Index::Alpha, hb.spaces(), &mut trial_rng(4, 0)), &hb, &kb).unwrap();
        let zero = TwoStateElement::from_cfree_pair(&OperatorPair::zero(Index::Beta, hb.spaces()), &hb, &kb).unwrap();
        let reports = check_htilde_sum_identity(&a, &zero, c(0.1), 1e-9).unwrap();
        assert!(reports.iter().all(|r| r.pass), "{reports:?}");
        let both_zero = check_htilde_sum_identity(&zero, &zero, c(0.2), 1e-9).unwrap();
        assert!((both_zero.last().unwrap().lhs - ONE).norm() < 1e-15);
    }

    #[test]
    fn linearization_with_zero_b() {
        let (hb, kb) = bases([3, 3, 3, 3], 8);
        let a = TwoStateElement::from_cfree_pair(&random_pair(Index::Alpha, hb.spaces(), &mut trial_rng(5, 0)), &hb, &kb).unwrap();
        let zero = TwoStateElement::from_cfree_pair(&OperatorPair::zero(Index::Beta, hb.spaces()), &hb, &kb).unwrap();
        let sum = a.sum(&zero).unwrap();
        let (reports, trace) = check_linearization_analytic(&a, &zero, &sum, Complex64::new(0.05, 0.02), 1e-8, 1e-9).unwrap();
        assert!(reports.iter().all(|r| r.pass));
        assert!(trace.t_gap < 1e-14);
        let csv = trace_csv(&[trace]);
        assert!(csv.starts_with("re_z,im_z,re_t1"));
        assert_eq!(csv.lines().count(), 2);
    }
}
