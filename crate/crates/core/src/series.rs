//! Truncated Laurent series and the transform tower
//! `h, k = t·h, k^{-1}`, the free R-transform and the c-free R-transform
//! `R(z) = 1/k^{-1}(z) − 1/k̃(k^{-1}(z))`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::numkernel::json::complex_vec;
use crate::numkernel::{ONE, ZERO};
use crate::report::CheckReport;
use crate::states::MomentData;

/// Tolerance on the cancelled pole of the c-free R-transform, relative to the
/// larger pole coefficient.
pub const POLE_TOL: f64 = 1e-12;

/// `Σ_{n=valuation}^{order} c_n tⁿ` with `valuation ≥ −1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedLaurentSeries {
    valuation: i32,
    #[serde(with = "complex_vec")]
    coeffs: Vec<Complex64>,
}

/// Which state's moments to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateSide {
    Phi,
    Psi,
}

impl TruncatedLaurentSeries {
    /// `coeffs[i]` is the coefficient of `t^(valuation + i)`.
    pub fn new(valuation: i32, coeffs: Vec<Complex64>) -> Result<Self> {
        if valuation < -1 {
            return Err(Error::InvalidSeries(format!(
                "valuation {valuation} below -1"
            )));
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidSeries("series needs at least one coefficient".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidSeries("non-finite coefficient".into()));
        }
        Ok(TruncatedLaurentSeries { valuation, coeffs })
    }

    pub fn from_real(valuation: i32, coeffs: &[f64]) -> Result<Self> {
        Self::new(valuation, coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// The zero series known through `order`.
    pub fn zero(order: i32) -> Self {
        TruncatedLaurentSeries {
            valuation: 0,
            coeffs: vec![ZERO; (order.max(0) + 1) as usize],
        }
    }

    /// `1 + O(t^(order+1))`.
    pub fn one(order: i32) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = ONE;
        s
    }

    /// The identity series `t`, known through `order ≥ 1`.
    pub fn identity(order: i32) -> Self {
        let mut coeffs = vec![ZERO; order.max(1) as usize];
        coeffs[0] = ONE;
        TruncatedLaurentSeries { valuation: 1, coeffs }
    }

    pub fn valuation(&self) -> i32 {
        self.valuation
    }

    /// Highest retained exponent.
    pub fn order(&self) -> i32 {
        self.valuation + self.coeffs.len() as i32 - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `tⁿ`; zero below the valuation, `None` above the order.
    pub fn coeff(&self, n: i32) -> Option<Complex64> {
        if n > self.order() {
            None
        } else if n < self.valuation {
            Some(ZERO)
        } else {
            Some(self.coeffs[(n - self.valuation) as usize])
        }
    }

    fn leading(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Coefficients of exponents `from..=to` (zero below the valuation).
    fn window(&self, from: i32, to: i32) -> Vec<Complex64> {
        (from..=to).map(|n| self.coeff(n).unwrap_or(ZERO)).collect()
    }

    /// Raises the valuation past exactly-zero leading coefficients.
    pub fn normalized(&self) -> Self {
        let skip = self
            .coeffs
            .iter()
            .take(self.coeffs.len() - 1)
            .take_while(|c| **c == ZERO)
            .count();
        TruncatedLaurentSeries {
            valuation: self.valuation + skip as i32,
            coeffs: self.coeffs[skip..].to_vec(),
        }
    }

    /// Truncates to a lower order.
    pub fn truncate(&self, order: i32) -> Result<Self> {
        if order < self.valuation {
            return Err(Error::InvalidSeries("truncation below the valuation".into()));
        }
        Ok(TruncatedLaurentSeries {
            valuation: self.valuation,
            coeffs: self.window(self.valuation, order.min(self.order())),
        })
    }

    /// Multiplies by `t^shift`.
    pub fn shift(&self, shift: i32) -> Result<Self> {
        Self::new(self.valuation + shift, self.coeffs.clone())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        TruncatedLaurentSeries {
            valuation: self.valuation,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let v = self.valuation.min(other.valuation);
        let o = self.order().min(other.order());
        let coeffs = (v..=o.max(v))
            .map(|n| self.coeff(n).unwrap_or(ZERO) + other.coeff(n).unwrap_or(ZERO))
            .collect();
        TruncatedLaurentSeries { valuation: v, coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-ONE))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let v = self.valuation + other.valuation;
        let o = (self.order() + other.valuation).min(other.order() + self.valuation);
        let len = (o - v + 1) as usize;
        let prod = poly_mul(&self.coeffs, &other.coeffs, len);
        Self::new(v, prod)
    }

    /// `1/f` for `f` with nonzero leading coefficient and valuation ≤ 1.
    pub fn reciprocal(&self) -> Result<Self> {
        if self.leading() == ZERO {
            return Err(Error::InvalidSeries("reciprocal of a series with zero leading coefficient".into()));
        }
        Self::new(-self.valuation, poly_reciprocal(&self.coeffs, self.coeffs.len()))
    }

    /// `f(g(t))` for `f` with valuation ≥ 0 and `g` with valuation ≥ 1.
    pub fn compose(&self, g: &Self) -> Result<Self> {
        if g.valuation < 1 {
            return Err(Error::InvalidSeries("inner series of a composition needs valuation >= 1".into()));
        }
        if self.valuation < 0 {
            return Err(Error::InvalidSeries("outer series of a composition needs valuation >= 0".into()));
        }
        let order = g.order().min((self.order() + 1) * g.valuation - 1);
        let n = (order + 1) as usize;
        let f = self.window(0, self.order());
        let gd = g.window(0, order);
        Ok(Self::new(0, poly_compose(&f, &gd, n))?.normalized())
    }

    /// Formal inverse of `k = t + O(t²)` by Newton iteration, doubling the
    /// number of correct coefficients per step.
    pub fn compositional_inverse(&self) -> Result<Self> {
        if self.valuation != 1 || (self.leading() - ONE).norm() > 1e-12 {
            return Err(Error::InvalidSeries(
                "compositional inverse needs valuation 1 and leading coefficient 1".into(),
            ));
        }
        let order = self.order();
        let n = (order + 1) as usize;
        let k = self.window(0, order);
        let dk = poly_derivative(&k);
        // w = t is correct through exponent 1.
        let mut w = vec![ZERO; n];
        if n > 1 {
            w[1] = ONE;
        }
        let mut correct = 1usize;
        while correct < order as usize {
            correct = (2 * correct).min(order as usize);
            let m = correct + 1;
            let kw = poly_compose(&k, &w[..m], m);
            let dkw = poly_compose(&dk, &w[..m], m);
            let mut residual = kw;
            residual[1] -= ONE;
            let step = poly_mul(&residual, &poly_reciprocal(&dkw, m), m);
            for i in 0..m {
                w[i] -= step[i];
            }
        }
        Self::new(1, w[1..].to_vec())
    }

    pub fn derivative(&self) -> Result<Self> {
        let coeffs: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * (self.valuation + i as i32) as f64)
            .collect();
        if self.valuation == 0 {
            if coeffs.len() == 1 {
                return Ok(Self::zero(-1).truncate(0).unwrap_or_else(|_| Self::zero(0)));
            }
            return Self::new(0, coeffs[1..].to_vec());
        }
        Self::new(self.valuation - 1, coeffs)
    }

    /// Value of the retained partial sum at `t`.
    pub fn evaluate(&self, t: Complex64) -> Complex64 {
        let poly = self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * t + c);
        poly * t.powi(self.valuation)
    }

    /// Largest absolute coefficient gap over the common range.
    pub fn max_coeff_gap(&self, other: &Self) -> f64 {
        let v = self.valuation.min(other.valuation);
        let o = self.order().min(other.order());
        (v..=o)
            .map(|n| (self.coeff(n).unwrap_or(ZERO) - other.coeff(n).unwrap_or(ZERO)).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("series serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: TruncatedLaurentSeries =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(raw.valuation, raw.coeffs)
    }
}

fn poly_mul(a: &[Complex64], b: &[Complex64], len: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; len];
    for (i, x) in a.iter().enumerate().take(len) {
        if *x == ZERO {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_reciprocal(a: &[Complex64], len: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; len];
    let inv0 = ONE / a[0];
    out[0] = inv0;
    for n in 1..len {
        let s: Complex64 = (1..=n.min(a.len() - 1)).map(|k| a[k] * out[n - k]).sum();
        out[n] = -s * inv0;
    }
    out
}

/// `f(g)` truncated to `len` coefficients, `g[0] = 0` assumed.
fn poly_compose(f: &[Complex64], g: &[Complex64], len: usize) -> Vec<Complex64> {
    let mut acc = vec![ZERO; len];
    for c in f.iter().rev() {
        acc = poly_mul(&acc, g, len);
        acc[0] += c;
    }
    acc
}

fn poly_derivative(a: &[Complex64]) -> Vec<Complex64> {
    if a.len() <= 1 {
        return vec![ZERO];
    }
    a.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect()
}

/// `h(t) = 1 + Σ m_n tⁿ` through order `N`.
pub fn series_from_moments(m: &MomentData, which: StateSide) -> TruncatedLaurentSeries {
    let moments = match which {
        StateSide::Phi => &m.phi_moments,
        StateSide::Psi => &m.psi_moments,
    };
    let mut coeffs = Vec::with_capacity(moments.len() + 1);
    coeffs.push(ONE);
    coeffs.extend_from_slice(moments);
    TruncatedLaurentSeries { valuation: 0, coeffs }
}

/// `k(t) = t·h(t)`.
pub fn k_series(h: &TruncatedLaurentSeries) -> TruncatedLaurentSeries {
    h.shift(1).expect("valuation stays >= -1")
}

/// c-free R-transform with coefficients of `z^0 … z^{N-1}` from `N` moments.
pub fn cfree_r_transform(m: &MomentData) -> Result<TruncatedLaurentSeries> {
    if m.order < 1 {
        return Err(Error::InvalidSeries("R-transform needs order >= 1".into()));
    }
    let k = k_series(&series_from_moments(m, StateSide::Psi));
    let k_tilde = k_series(&series_from_moments(m, StateSide::Phi));
    let k_inv = k.compositional_inverse()?;
    // k^{-1} = z·u, k̃(k^{-1}) = z·v with u(0) = v(0) = 1.
    let u = k_inv.shift(-1)?;
    let v = k_tilde.compose(&k_inv)?.shift(-1)?;
    let inv_u = u.reciprocal()?;
    let inv_v = v.reciprocal()?;
    let diff = inv_u.sub(&inv_v);
    let pole = diff.coeff(0).unwrap_or(ZERO).norm();
    let pole_scale = inv_u.coeffs[0].norm().max(inv_v.coeffs[0].norm());
    if pole > POLE_TOL * pole_scale {
        return Err(Error::PoleNotCancelled { residual: pole / pole_scale });
    }
    let r = TruncatedLaurentSeries::new(0, diff.window(1, diff.order()))?;
    let m1 = m.phi_moments[0];
    if (r.coeffs[0] - m1).norm() > 1e-12 * (1.0 + m1.norm()) {
        return Err(Error::InvalidSeries("constant term differs from the first phi-moment".into()));
    }
    Ok(r)
}

/// Voiculescu's R-transform `1/k^{-1}(z) − 1/z` from single-state moments.
pub fn free_r_transform(moments: &[Complex64]) -> Result<TruncatedLaurentSeries> {
    cfree_r_transform(&MomentData::single_state(moments.to_vec()))
}

/// Residual of `R(k(t)) = (1/t)(1 − 1/h̃(t))`, the formal form of
/// `R(G^ψ(λ)) = λ − 1/G^φ(λ)` under `λ = 1/t`.
pub fn r_of_k_residual(m: &MomentData) -> Result<f64> {
    let r = cfree_r_transform(m)?;
    let k = k_series(&series_from_moments(m, StateSide::Psi));
    let lhs = r.compose(&k)?;
    let h_tilde = series_from_moments(m, StateSide::Phi);
    let rhs = TruncatedLaurentSeries::one(h_tilde.order())
        .sub(&h_tilde.reciprocal()?)
        .truncate(h_tilde.order())?;
    let rhs = TruncatedLaurentSeries::new(0, rhs.window(1, rhs.order()))?;
    Ok(lhs.max_coeff_gap(&rhs))
}

/// Coefficients of `R_{a+b} − R_a − R_b` through `z^{order-1}`.
pub fn check_linearization_series(
    m_a: &MomentData,
    m_b: &MomentData,
    m_sum: &MomentData,
    order: usize,
) -> Result<CheckReport> {
    for m in [m_a, m_b, m_sum] {
        if m.order != order {
            return Err(Error::DimensionMismatch {
                context: "moment order for linearization",
                expected: order,
                found: m.order,
            });
        }
    }
    let ra = cfree_r_transform(m_a)?;
    let rb = cfree_r_transform(m_b)?;
    let rs = cfree_r_transform(m_sum)?;
    let sum = ra.add(&rb);
    let gap = rs.max_coeff_gap(&sum);
    let scale = 1f64
        .max(rs.max_abs_coeff())
        .max(ra.max_abs_coeff())
        .max(rb.max_abs_coeff());
    let per_coeff: Vec<f64> = (0..order as i32)
        .map(|n| (rs.coeff(n).unwrap_or(ZERO) - sum.coeff(n).unwrap_or(ZERO)).norm())
        .collect();
    Ok(CheckReport::gap(
        "linearization_series",
        gap,
        scale,
        1e-8,
        json!({ "order": order, "coefficient_gaps": per_coeff }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: i32, c: &[f64]) -> TruncatedLaurentSeries {
        TruncatedLaurentSeries::from_real(v, c).unwrap()
    }

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn arithmetic_examples() {
        let geo = s(0, &[1.0, -1.0, 0.0, 0.0, 0.0]).reciprocal().unwrap();
        assert_eq!(geo, s(0, &[1.0; 5]));
        let p = s(0, &[0.0, 1.0, 1.0]).compose(&TruncatedLaurentSeries::identity(2)).unwrap();
        assert_eq!(p.valuation(), 1);
        assert_eq!((0..3).map(|n| p.coeff(n).unwrap()).collect::<Vec<_>>(), [re(0.0), re(1.0), re(1.0)]);
        let m = s(1, &[1.0, 0.0, 0.0]).mul(&s(0, &[1.0, 0.0, 1.0])).unwrap();
        assert_eq!(m.valuation(), 1);
        assert_eq!(m.coeffs(), &[re(1.0), re(0.0), re(1.0)]);
        assert!(s(-1, &[1.0]).mul(&s(-1, &[1.0])).is_err());
        assert!(s(0, &[0.0, 1.0]).reciprocal().is_err());
        assert!(TruncatedLaurentSeries::from_real(-2, &[1.0]).is_err());
    }

    #[test]
    fn inverse_examples() {
        let t = TruncatedLaurentSeries::identity(6);
        assert_eq!(t.compositional_inverse().unwrap(), t);
        // k = t + t³ + t⁵ + t⁷ (flip matrix moments).
        let k = s(1, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
        let inv = k.compositional_inverse().unwrap();
        let expected = [1.0, 0.0, -1.0, 0.0, 2.0, 0.0, -5.0];
        for (n, e) in expected.iter().enumerate() {
            assert!((inv.coeff(n as i32 + 1).unwrap() - re(*e)).norm() < 1e-14);
        }
        assert!(s(0, &[1.0, 1.0]).compositional_inverse().is_err());
        assert!(s(1, &[2.0, 1.0]).compositional_inverse().is_err());
    }

    #[test]
    fn r_transform_examples() {
        let flip = MomentData::single_state((1..=8).map(|n| re(if n % 2 == 0 { 1.0 } else { 0.0 })).collect());
        let r = cfree_r_transform(&flip).unwrap();
        let expected = [0.0, 1.0, 0.0, -1.0, 0.0, 2.0, 0.0, -5.0];
        assert_eq!(r.valuation(), 0);
        assert_eq!(r.order(), 7);
        for (n, e) in expected.iter().enumerate() {
            assert!((r.coeff(n as i32).unwrap() - re(*e)).norm() < 1e-13);
        }
        let zero = MomentData::single_state(vec![re(0.0); 4]);
        assert!(cfree_r_transform(&zero).unwrap().max_abs_coeff() == 0.0);
        let ones = MomentData::single_state(vec![re(1.0); 4]);
        let r1 = cfree_r_transform(&ones).unwrap();
        assert!((r1.coeff(0).unwrap() - re(1.0)).norm() < 1e-14);
        assert!(r1.coeffs()[1..].iter().all(|c| c.norm() < 1e-14));
    }

    #[test]
    fn r_of_k_identity_on_two_state_data() {
        let m = MomentData::new(
            vec![re(0.3), re(0.5), Complex64::new(0.1, 0.2), re(0.7), re(-0.2), re(0.4)],
            vec![re(-0.1), re(0.6), re(0.05), re(0.5), re(0.02), re(0.45)],
        )
        .unwrap();
        assert!(r_of_k_residual(&m).unwrap() < 1e-12);
    }

    #[test]
    fn linearization_with_zero_and_constants() {
        let a = MomentData::new(vec![re(0.2), re(0.5), re(0.1)], vec![re(0.0), re(0.4), re(0.0)]).unwrap();
        let zero = MomentData::single_state(vec![re(0.0); 3]);
        assert!(check_linearization_series(&a, &zero, &a, 3).unwrap().abs_err < 1e-14);
        let c = |x: f64| MomentData::single_state((1..=3).map(|n| re(x.powi(n))).collect());
        let report = check_linearization_series(&c(0.5), &c(-0.25), &c(0.25), 3).unwrap();
        assert!(report.pass && report.abs_err < 1e-14);
        assert!(check_linearization_series(&a, &zero, &a, 4).is_err());
    }

    #[test]
    fn json_round_trip_and_evaluation() {
        let r = s(-1, &[1.0, 2.0, 3.0]);
        assert_eq!(TruncatedLaurentSeries::from_json(&r.to_json()).unwrap(), r);
        assert_eq!(r.to_json(), r#"{"valuation":-1,"coeffs":[[1.0,0.0],[2.0,0.0],[3.0,0.0]]}"#);
        let z = re(0.5);
        assert!((r.evaluate(z) - re(2.0 + 2.0 + 1.5)).norm() < 1e-15);
        let d = s(0, &[1.0, 2.0, 3.0]).derivative().unwrap();
        assert_eq!(d.coeffs(), &[re(2.0), re(6.0)]);
    }
}
