//! Verification suites: seeded random instances fed through the
//! constructions and checkers, one list of reports per suite.
//!
//! Trials run on the rayon pool; results are collected in trial order so a
//! configuration always yields the same report sequence. A computation error
//! inside a trial becomes a failing `trial_error` report.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::analytic::{
    check_centered_resolvent_identity, check_htilde_sum_identity, check_linearization_analytic, rho_bound,
    LinearizationTrace, TwoStateElement,
};
use crate::embeddings::{
    adjoint_compatibility_check, embed_boolean, embed_cfree, embed_free, embed_monotone, embed_orthogonal,
    home_block_mask, multiplicativity_gap, EmbeddedOperator, OperatorPair,
};
use crate::error::{Error, Result};
use crate::freecopies::{alternating_product_at_eta_tilde, build_free_copy_context, rho, FreeCopyContext};
use crate::independence::{check_boolean, check_cfree, check_free, check_monotone, check_orthogonal, PsiState};
use crate::numkernel::{inner, CMatrix, CVector, DENSE_SOLVE_LIMIT};
use crate::random::{random_contraction, random_pair, random_self_adjoint, trial_rng};
use crate::report::CheckReport;
use crate::series::{cfree_r_transform, check_linearization_series, r_of_k_residual};
use crate::spaces::{build_product_basis, BasisSide, BasisWord, FourSpaces, Index, Letter, PointedSpace, ProductBasis};
use crate::states::{alternating_word_vector, moment_data, power_moments, psi_center};

use Index::{Alpha, Beta};

/// Tolerance for state agreement and exact-construction comparisons.
pub const EXACT_TOL: f64 = 1e-12;
/// Entrywise tolerance for closed-form word vectors.
pub const CLOSED_FORM_TOL: f64 = 1e-11;
/// Tolerance on R-transform coefficients and the analytic linearization residual.
pub const LINEARIZATION_TOL: f64 = 1e-8;
/// Longest words checked by the independence suites.
pub const MAX_WORD_LEN: usize = 6;
/// Longest alternation pattern in the closed-form check.
pub const MAX_PATTERN_LEN: usize = 5;
/// Points on the circle in the analytic linearization suite.
pub const CIRCLE_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    Cfree,
    FreeCopies,
    Specializations,
    LambdaProperties,
    PsiProduct,
    LinearizationSeries,
    LinearizationAnalytic,
    HaagerupLemmas,
    All,
}

impl Suite {
    /// Every concrete suite, in the order `All` runs them.
    pub const CONCRETE: [Suite; 8] = [
        Suite::Specializations,
        Suite::LambdaProperties,
        Suite::Cfree,
        Suite::PsiProduct,
        Suite::FreeCopies,
        Suite::LinearizationSeries,
        Suite::LinearizationAnalytic,
        Suite::HaagerupLemmas,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Cfree => "cfree",
            Suite::FreeCopies => "free-copies",
            Suite::Specializations => "specializations",
            Suite::LambdaProperties => "lambda-properties",
            Suite::PsiProduct => "psi-product",
            Suite::LinearizationSeries => "linearization-series",
            Suite::LinearizationAnalytic => "linearization-analytic",
            Suite::HaagerupLemmas => "haagerup-lemmas",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::CONCRETE
            .iter()
            .chain(std::iter::once(&Suite::All))
            .find(|suite| suite.name() == s)
            .copied()
            .ok_or_else(|| Error::Parse(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub dims: [usize; 4],
    pub depth: usize,
    pub order: usize,
    pub seed: u64,
    pub trials: usize,
    /// Tolerance of the relative factorization and lemma checks.
    pub tol: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            dims: [3, 3, 3, 3],
            depth: 8,
            order: 8,
            seed: 0,
            trials: 10,
            tol: 1e-9,
        }
    }
}

impl SuiteConfig {
    fn spaces(&self) -> Result<FourSpaces> {
        FourSpaces::from_dims(self.dims)
    }

    fn validate_common(&self) -> Result<()> {
        self.spaces()?;
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Precondition(format!("tolerance {} must be positive", self.tol)));
        }
        Ok(())
    }

    /// Rejects configurations the suite cannot run on.
    pub fn validate(&self, suite: Suite) -> Result<()> {
        self.validate_common()?;
        match suite {
            Suite::All => Suite::CONCRETE.iter().try_for_each(|&s| self.validate(s)),
            Suite::LinearizationSeries => {
                if self.order < 1 || self.depth < self.order {
                    return Err(Error::Precondition(format!(
                        "series suites need 1 <= order <= depth (order {}, depth {})",
                        self.order, self.depth
                    )));
                }
                Ok(())
            }
            Suite::FreeCopies | Suite::LinearizationAnalytic => {
                if self.dims[0] < 2 {
                    return Err(Error::Precondition("free copies need dim H_alpha >= 2".into()));
                }
                if self.depth < 2 {
                    return Err(Error::Precondition("free copies need depth >= 2".into()));
                }
                Ok(())
            }
            Suite::Specializations | Suite::HaagerupLemmas => {
                if self.depth < 1 {
                    return Err(Error::Precondition(format!("suite {suite} needs depth >= 1")));
                }
                Ok(())
            }
            Suite::Cfree | Suite::LambdaProperties | Suite::PsiProduct => Ok(()),
        }
    }
}

/// Reports of one suite; `skipped` is set when `all` passed over a suite
/// whose preconditions the configuration does not meet.
#[derive(Debug, Clone)]
pub struct SuiteRun {
    pub suite: Suite,
    pub reports: Vec<CheckReport>,
    pub trace: Vec<LinearizationTrace>,
    pub skipped: Option<String>,
}

/// Runs `suite` (every concrete suite for `All`).
pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<Vec<SuiteRun>> {
    if suite == Suite::All {
        cfg.validate_common()?;
        return Suite::CONCRETE
            .iter()
            .map(|&s| match cfg.validate(s) {
                Ok(()) => run_concrete(s, cfg),
                Err(e) => Ok(SuiteRun {
                    suite: s,
                    reports: Vec::new(),
                    trace: Vec::new(),
                    skipped: Some(e.to_string()),
                }),
            })
            .collect();
    }
    cfg.validate(suite)?;
    Ok(vec![run_concrete(suite, cfg)?])
}

fn run_concrete(suite: Suite, cfg: &SuiteConfig) -> Result<SuiteRun> {
    log::info!("running suite {suite} ({} trials)", cfg.trials);
    let mut trace = Vec::new();
    let reports = match suite {
        Suite::Cfree => cfree_suite(cfg)?,
        Suite::PsiProduct => psi_product_suite(cfg)?,
        Suite::Specializations => specializations_suite(cfg)?,
        Suite::LambdaProperties => lambda_properties_suite(cfg)?,
        Suite::FreeCopies => free_copies_suite(cfg)?,
        Suite::LinearizationSeries => linearization_series_suite(cfg)?,
        Suite::LinearizationAnalytic => {
            let (reports, rows) = linearization_analytic_suite(cfg)?;
            trace = rows;
            reports
        }
        Suite::HaagerupLemmas => haagerup_suite(cfg)?,
        Suite::All => unreachable!("expanded by run_suite"),
    };
    Ok(SuiteRun {
        suite,
        reports,
        trace,
        skipped: None,
    })
}

/// Runs `f` for trials `0..cfg.trials` in parallel, in trial order.
fn per_trial<T, F>(cfg: &SuiteConfig, f: F) -> Vec<(usize, Result<T>)>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
{
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| (t, f(&mut trial_rng(cfg.seed, t as u64))))
        .collect()
}

fn collect_reports(results: Vec<(usize, Result<Vec<CheckReport>>)>) -> Vec<CheckReport> {
    results
        .into_iter()
        .flat_map(|(t, r)| {
            let reports = r.unwrap_or_else(|e| {
                vec![CheckReport::condition("trial_error", false, json!({ "error": e.to_string() }))]
            });
            reports.into_iter().map(move |rep| rep.with_context("trial", json!(t)))
        })
        .collect()
}

fn h_basis(spaces: FourSpaces, depth: usize) -> Arc<ProductBasis> {
    Arc::new(build_product_basis(spaces, depth, BasisSide::H))
}

fn k_basis(spaces: FourSpaces, depth: usize) -> Arc<ProductBasis> {
    Arc::new(build_product_basis(spaces, depth, BasisSide::K))
}

fn family(iota: Index, count: usize, basis: &Arc<ProductBasis>, rng: &mut ChaCha8Rng) -> Result<(Vec<OperatorPair>, Vec<EmbeddedOperator>)> {
    let pairs: Vec<OperatorPair> = (0..count).map(|_| random_pair(iota, basis.spaces(), rng)).collect();
    let ops = pairs.iter().map(|p| embed_cfree(p, basis)).collect::<Result<_>>()?;
    Ok((pairs, ops))
}

fn word_len(depth: usize) -> usize {
    depth.min(MAX_WORD_LEN)
}

/// Alternating-word closed form at `ξ` against direct application, and the
/// c-free factorization of random families.
fn cfree_suite(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let basis = h_basis(cfg.spaces()?, cfg.depth);
    let xi = basis.distinguished_vector();
    let max_pattern = cfg.depth.min(MAX_PATTERN_LEN);
    Ok(collect_reports(per_trial(cfg, |rng| {
        let mut reports = Vec::new();
        for len in 1..=max_pattern {
            for start in Index::BOTH {
                let pairs: Vec<OperatorPair> = (0..len)
                    .map(|pos| {
                        let iota = if pos % 2 == 0 { start } else { start.other() };
                        psi_center(&random_pair(iota, basis.spaces(), rng))
                    })
                    .collect();
                let closed = alternating_word_vector(&pairs, &basis)?;
                let mut direct = xi.clone();
                for p in &pairs {
                    direct = embed_cfree(p, &basis)?.apply(&direct)?;
                }
                reports.push(CheckReport::gap(
                    "alternating_word_closed_form",
                    closed.max_abs_diff(&direct),
                    1.0,
                    CLOSED_FORM_TOL,
                    json!({ "len": len, "start": start }),
                ));
            }
        }
        let len = word_len(cfg.depth);
        if len >= 2 {
            let (_, fa) = family(Alpha, 2, &basis, rng)?;
            let (_, fb) = family(Beta, 2, &basis, rng)?;
            reports.extend(check_cfree([&fa, &fb], &xi, &PsiState::KSide, len, cfg.tol)?);
        }
        Ok(reports)
    })))
}

/// Marginal agreement `φ̂∘Λ = φ_ι`, `ψ̂∘λ = ψ_ι` and the factorization of
/// centered alternating words.
fn psi_product_suite(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let spaces = cfg.spaces()?;
    let h = h_basis(spaces, cfg.depth);
    let k = k_basis(spaces, cfg.depth);
    let xi = h.distinguished_vector();
    let eta = k.distinguished_vector();
    let n_max = word_len(cfg.depth);
    Ok(collect_reports(per_trial(cfg, |rng| {
        let mut reports = Vec::new();
        let (pa, fa) = family(Alpha, 2, &h, rng)?;
        let (pb, fb) = family(Beta, 2, &h, rng)?;
        for (pair, op) in pa.iter().chain(&pb).zip(fa.iter().chain(&fb)) {
            let e0 = |n: usize| CVector::basis(n, 0);
            let t_moments = power_moments(&pair.t, &e0(pair.t.rows()), n_max)?;
            let s_moments = power_moments(&pair.s, &e0(pair.s.rows()), n_max)?;
            let lam = embed_free(&pair.s, pair.index, &k)?;
            let phi_hat = power_moments(op, &xi, n_max)?;
            let psi_hat = power_moments(&lam, &eta, n_max)?;
            for n in 0..n_max {
                let ctx = json!({ "index": pair.index, "power": n + 1 });
                reports.push(CheckReport::compare("phi_marginal", phi_hat[n], t_moments[n], 1.0, EXACT_TOL, ctx.clone()));
                reports.push(CheckReport::compare("psi_marginal", psi_hat[n], s_moments[n], 1.0, EXACT_TOL, ctx));
            }
        }
        if n_max >= 2 {
            reports.extend(check_cfree([&fa, &fb], &xi, &PsiState::KSide, n_max, cfg.tol)?);
        }
        Ok(reports)
    })))
}

/// `⟨w ξ, ξ⟩` for every word over `ops` up to `max_len`, in a fixed order.
fn all_word_moments(ops: &[&EmbeddedOperator], v: &CVector, max_len: usize) -> Result<Vec<(Vec<usize>, Complex64)>> {
    let mut out = Vec::new();
    let mut frontier: Vec<(Vec<usize>, CVector)> = vec![(Vec::new(), v.clone())];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (word, w) in &frontier {
            for (g, op) in ops.iter().enumerate() {
                let mut label = vec![g];
                label.extend(word);
                let u = op.apply(w)?;
                out.push((label.clone(), inner(&u, v)?));
                next.push((label, u));
            }
        }
        frontier = next;
    }
    Ok(out)
}

fn compare_word_moments(
    name: &str,
    degenerate: &[&EmbeddedOperator],
    deg_vec: &CVector,
    direct: &[&EmbeddedOperator],
    dir_vec: &CVector,
    max_len: usize,
) -> Result<Vec<CheckReport>> {
    let lhs = all_word_moments(degenerate, deg_vec, max_len)?;
    let rhs = all_word_moments(direct, dir_vec, max_len)?;
    Ok(lhs
        .into_iter()
        .zip(rhs)
        .map(|((word, x), (_, y))| CheckReport::compare(name, x, y, 1.0, EXACT_TOL, json!({ "word": word })))
        .collect())
}

/// Alternating words over reduced dimensions `(ra, rb)` of lengths `1..=n`.
fn alternating_word_count(ra: usize, rb: usize, n: usize) -> usize {
    let (mut end_a, mut end_b, mut total) = (ra, rb, 0);
    for _ in 0..n {
        total += end_a + end_b;
        (end_a, end_b) = (ra * end_b, rb * end_a);
    }
    total
}

fn count_report(case: &str, basis: &ProductBasis, direct: usize) -> CheckReport {
    CheckReport::condition(
        format!("basis_count_{case}"),
        basis.len() == direct,
        json!({ "degenerate": basis.len(), "direct": direct }),
    )
}

/// The four degenerate cases against their direct constructions.
fn specializations_suite(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let [ha, ka, hb, kb] = cfg.dims;
    let depth = cfg.depth;
    let boolean = h_basis(FourSpaces::from_dims([ha, 1, hb, 1])?, depth);
    let monotone = h_basis(FourSpaces::from_dims([ha, 1, hb, hb])?, depth);
    let orthogonal = h_basis(FourSpaces::from_dims([ha, 1, 1, kb])?, depth);
    let free_spaces = FourSpaces::from_dims([ka, ka, kb, kb])?;
    let free_h = h_basis(free_spaces, depth);
    let free_k = k_basis(free_spaces, depth + 1);
    let (ra, rb) = (ha - 1, hb - 1);
    let counts = vec![
        count_report("boolean", &boolean, 1 + ra + rb),
        count_report("monotone", &monotone, 1 + ra + rb + rb * ra),
        count_report("orthogonal", &orthogonal, 1 + ra + ra * (kb - 1)),
        count_report("free", &free_h, 1 + alternating_word_count(ka - 1, kb - 1, depth + 1)),
    ];
    let len = word_len(depth);
    let one = CMatrix::zeros(1, 1);
    let mut reports = counts;
    reports.extend(collect_reports(per_trial(cfg, |rng| {
        let ta = random_self_adjoint(ha, rng);
        let tb = random_self_adjoint(hb, rng);
        let sb = random_self_adjoint(kb, rng);
        let fa = random_self_adjoint(ka, rng);
        let fb = random_self_adjoint(kb, rng);
        let mut out = Vec::new();

        let xi = boolean.distinguished_vector();
        let deg = [
            embed_cfree(&OperatorPair::new(Alpha, ta.clone(), one.clone())?, &boolean)?,
            embed_cfree(&OperatorPair::new(Beta, tb.clone(), one.clone())?, &boolean)?,
        ];
        let dir = [embed_boolean(&ta, Alpha, &boolean)?, embed_boolean(&tb, Beta, &boolean)?];
        out.extend(compare_word_moments("boolean_moments", &[&deg[0], &deg[1]], &xi, &[&dir[0], &dir[1]], &xi, len)?);
        if len >= 2 {
            out.extend(check_boolean([&dir[..1], &dir[1..]], &xi, len, cfg.tol)?);
        }

        let xi = monotone.distinguished_vector();
        let deg = [
            embed_cfree(&OperatorPair::new(Alpha, ta.clone(), one.clone())?, &monotone)?,
            embed_cfree(&OperatorPair::new(Beta, tb.clone(), tb.clone())?, &monotone)?,
        ];
        let dir = [embed_monotone(&ta, Alpha, &monotone)?, embed_monotone(&tb, Beta, &monotone)?];
        out.extend(compare_word_moments("monotone_moments", &[&deg[0], &deg[1]], &xi, &[&dir[0], &dir[1]], &xi, len)?);
        if len >= 2 {
            out.extend(check_monotone([&dir[..1], &dir[1..]], &xi, len, cfg.tol)?);
        }

        let xi = orthogonal.distinguished_vector();
        let deg = [
            embed_cfree(&OperatorPair::new(Alpha, ta.clone(), one.clone())?, &orthogonal)?,
            embed_cfree(&OperatorPair::new(Beta, one.clone(), sb.clone())?, &orthogonal)?,
        ];
        let dir = [embed_orthogonal(&ta, Alpha, &orthogonal)?, embed_orthogonal(&sb, Beta, &orthogonal)?];
        out.extend(compare_word_moments("orthogonal_moments", &[&deg[0], &deg[1]], &xi, &[&dir[0], &dir[1]], &xi, len)?);
        if ha >= 2 && len >= 3 {
            let w = BasisWord::bare(Alpha, 1);
            let psi = orthogonal
                .unit_vector(&w)
                .ok_or_else(|| Error::InadmissibleWord(w.to_string()))?;
            out.extend(check_orthogonal([&dir[..1], &dir[1..]], &xi, &psi, len, cfg.tol)?);
        }

        let xi = free_h.distinguished_vector();
        let eta = free_k.distinguished_vector();
        let deg = [
            embed_cfree(&OperatorPair::new(Alpha, fa.clone(), fa.clone())?, &free_h)?,
            embed_cfree(&OperatorPair::new(Beta, fb.clone(), fb.clone())?, &free_h)?,
        ];
        let dir = [embed_free(&fa, Alpha, &free_k)?, embed_free(&fb, Beta, &free_k)?];
        out.extend(compare_word_moments("free_moments", &[&deg[0], &deg[1]], &xi, &[&dir[0], &dir[1]], &eta, len)?);
        if len >= 2 {
            out.extend(check_free([&dir[..1], &dir[1..]], &eta, len, cfg.tol)?);
        }
        Ok(out)
    })));
    Ok(reports)
}

/// Largest entry of `a − b` over the columns selected by `keep`.
fn column_gap(a: &EmbeddedOperator, b: &EmbeddedOperator, keep: &[bool]) -> f64 {
    a.matrix().max_abs_diff_on_columns(b.matrix(), |j| keep[j])
}

/// Splitting, linearity, multiplicativity, adjoints, injectivity and the
/// norm bound of `(T, S) ↦ Λ_(T,S)`.
fn lambda_properties_suite(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let spaces = cfg.spaces()?;
    let basis = h_basis(spaces, cfg.depth);
    let masks: Vec<(Index, Vec<bool>)> = Index::BOTH.iter().map(|&i| (i, home_block_mask(&basis, i))).collect();
    Ok(collect_reports(per_trial(cfg, |rng| {
        let mut reports = Vec::new();
        for (iota, home) in &masks {
            let iota = *iota;
            let perp: Vec<bool> = home.iter().map(|h| !h).collect();
            let (hn, kn) = (spaces.h(iota).dim(), spaces.k(iota).dim());
            let t1 = random_contraction(hn, rng);
            let t2 = random_contraction(hn, rng);
            let s1 = random_contraction(kn, rng);
            let s2 = random_contraction(kn, rng);
            let lam = |t: &CMatrix, s: &CMatrix| embed_cfree(&OperatorPair::new(iota, t.clone(), s.clone())?, &basis);
            let base = lam(&t1, &s1)?;
            let ctx = json!({ "index": iota });

            let split_p = column_gap(&base, &lam(&t1, &s2)?, home);
            let split_perp = column_gap(&base, &lam(&t2, &s1)?, &perp);
            reports.push(CheckReport::gap("lambda_split_p", split_p, 1.0, EXACT_TOL, ctx.clone()));
            reports.push(CheckReport::gap("lambda_split_p_perp", split_perp, 1.0, EXACT_TOL, ctx.clone()));

            let c = Complex64::new(0.7, -0.4);
            let scaled = lam(&t1.scale(c), &s1.scale(c))?;
            let homog = scaled.matrix().max_abs_diff(base.scale(c).matrix());
            reports.push(CheckReport::gap("lambda_homogeneity", homog, 1.0, EXACT_TOL, ctx.clone()));
            let add_t = column_gap(&lam(&t1.add(&t2)?, &s1)?, &base.add(&lam(&t2, &s1)?)?, home);
            let add_s = column_gap(&lam(&t1, &s1.add(&s2)?)?, &base.add(&lam(&t1, &s2)?)?, &perp);
            reports.push(CheckReport::gap("lambda_additive_p", add_t, 1.0, EXACT_TOL, ctx.clone()));
            reports.push(CheckReport::gap("lambda_additive_p_perp", add_s, 1.0, EXACT_TOL, ctx.clone()));

            let p1 = OperatorPair::new(iota, t1.clone(), s1.clone())?;
            let p2 = OperatorPair::new(iota, t2.clone(), s2.clone())?;
            let mult = multiplicativity_gap(&p2, &p1, &basis)?;
            reports.push(CheckReport::gap("lambda_restricted_multiplicativity", mult, 1.0, EXACT_TOL, ctx.clone()));
            reports.push(adjoint_compatibility_check(&p1, &basis)?);

            let sa = random_pair(iota, &spaces, rng);
            let lsa = embed_cfree(&sa, &basis)?;
            let sa_gap = lsa.adjoint().matrix().max_abs_diff(lsa.matrix());
            reports.push(CheckReport::gap("lambda_self_adjoint_transfer", sa_gap, 1.0, EXACT_TOL, ctx.clone()));

            if let Some(gap) = injectivity_gap(&base, &p1, &basis)? {
                reports.push(CheckReport::gap("lambda_injective_recovery", gap, 1.0, EXACT_TOL, ctx.clone()));
            }

            let (norm, method) = if basis.len() <= DENSE_SOLVE_LIMIT {
                (base.to_dense().spectral_norm(), "svd")
            } else {
                (base.matrix().spectral_norm_estimate(500), "power_iteration")
            };
            let bound = t1.spectral_norm().max(s1.spectral_norm());
            reports.push(CheckReport::condition(
                "lambda_norm_bound",
                norm <= bound + 1e-10,
                json!({ "index": iota, "norm": norm, "bound": bound, "method": method }),
            ));
        }
        Ok(reports)
    })))
}

/// Reads `T` off the home block and `S` off the block over `h_ῑ^o` and
/// compares with the inputs; `None` when the basis has no such block.
fn injectivity_gap(op: &EmbeddedOperator, pair: &OperatorPair, basis: &ProductBasis) -> Result<Option<f64>> {
    let iota = pair.index;
    let spaces = basis.spaces();
    if spaces.h(iota.other()).dim() < 2 || basis.depth() < 1 {
        return Ok(None);
    }
    let block = |words: Vec<BasisWord>| -> Result<Vec<usize>> {
        words
            .iter()
            .map(|w| basis.position(w).ok_or_else(|| Error::InadmissibleWord(w.to_string())))
            .collect()
    };
    let home = block(
        std::iter::once(BasisWord::vacuum())
            .chain((1..spaces.h(iota).dim()).map(|c| BasisWord::bare(iota, c)))
            .collect(),
    )?;
    let w0 = BasisWord::bare(iota.other(), 1);
    let s_block = block(
        std::iter::once(w0.clone())
            .chain((1..spaces.k(iota).dim()).map(|c| w0.prepend(Letter::new(iota, c))))
            .collect(),
    )?;
    let read = |idx: &[usize]| -> CMatrix {
        let mut m = CMatrix::zeros(idx.len(), idx.len());
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                m[(r, c)] = op.matrix().get(i, j);
            }
        }
        m
    };
    Ok(Some(read(&home).max_abs_diff(&pair.t).max(read(&s_block).max_abs_diff(&pair.s))))
}

fn free_copy_context(cfg: &SuiteConfig) -> Result<FreeCopyContext> {
    build_free_copy_context(PointedSpace::new(cfg.dims[0])?, PointedSpace::new(cfg.dims[1])?, cfg.depth)
}

/// ξ- and η̃-state agreement, c-freeness w.r.t. `(ξ, η̃)`, freeness at `η̃`,
/// and the closed form of centered alternating products at `η̃`.
fn free_copies_suite(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let ctx = free_copy_context(cfg)?;
    let (h, k) = (cfg.dims[0], cfg.dims[1]);
    let xi = ctx.xi();
    let eta = ctx.eta_tilde();
    // Words at η̃ are exact up to depth − 1 letters.
    let n_eta = (cfg.depth - 1).min(MAX_WORD_LEN);
    let n_xi = word_len(cfg.depth);
    Ok(collect_reports(per_trial(cfg, |rng| {
        let mut reports = Vec::new();
        let mut fams: [Vec<EmbeddedOperator>; 2] = [Vec::new(), Vec::new()];
        for (slot, side) in Index::BOTH.iter().enumerate() {
            for _ in 0..2 {
                let xt = random_self_adjoint(h, rng);
                let xs = random_self_adjoint(k, rng);
                let op = rho(&xt, &xs, *side, &ctx)?;
                let t_m = power_moments(&xt, &CVector::basis(h, 0), n_eta)?;
                let s_m = power_moments(&xs, &CVector::basis(k, 0), n_eta)?;
                let at_xi = power_moments(&op, &xi, n_eta)?;
                let at_eta = power_moments(&op, &eta, n_eta)?;
                for n in 0..n_eta {
                    let c = json!({ "side": side, "power": n + 1 });
                    reports.push(CheckReport::compare("xi_state_agreement", at_xi[n], t_m[n], 1.0, EXACT_TOL, c.clone()));
                    reports.push(CheckReport::compare("eta_tilde_state_agreement", at_eta[n], s_m[n], 1.0, EXACT_TOL, c));
                }
                fams[slot].push(op);
            }
        }
        if n_xi >= 2 {
            reports.extend(check_cfree([&fams[0], &fams[1]], &xi, &PsiState::Vector(eta.clone()), n_xi, cfg.tol)?);
        }
        if n_eta >= 2 {
            reports.extend(check_free([&fams[0], &fams[1]], &eta, n_eta, cfg.tol)?);
        }
        let mut n = 2;
        while n < cfg.depth && n <= MAX_WORD_LEN {
            let inputs: Vec<(CMatrix, CMatrix)> = (0..n)
                .map(|_| {
                    let xt = random_self_adjoint(h, rng);
                    let xs = random_self_adjoint(k, rng);
                    let centered = xs.shift(xs[(0, 0)]);
                    (xt, centered)
                })
                .collect();
            let closed = alternating_product_at_eta_tilde(&inputs, &ctx)?;
            let mut direct = eta.clone();
            for (pos, (xt, xs)) in inputs.iter().enumerate() {
                let side = if pos % 2 == 0 { Alpha } else { Beta };
                direct = rho(xt, xs, side, &ctx)?.apply(&direct)?;
            }
            reports.push(CheckReport::gap(
                "eta_tilde_closed_form",
                closed.max_abs_diff(&direct),
                1.0,
                CLOSED_FORM_TOL,
                json!({ "len": n }),
            ));
            n += 2;
        }
        Ok(reports)
    })))
}

/// Operator-model moments of `a`, `b`, `a + b` and the series linearization.
fn linearization_series_suite(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let spaces = cfg.spaces()?;
    let h = h_basis(spaces, cfg.depth);
    let k = k_basis(spaces, cfg.depth);
    let order = cfg.order;
    Ok(collect_reports(per_trial(cfg, |rng| {
        let pa = random_pair(Alpha, &spaces, rng);
        let pb = random_pair(Beta, &spaces, rng);
        let (la, lb) = (embed_cfree(&pa, &h)?, embed_cfree(&pb, &h)?);
        let (fa, fb) = (embed_free(&pa.s, Alpha, &k)?, embed_free(&pb.s, Beta, &k)?);
        let m_a = moment_data(&la, &fa, order)?;
        let m_b = moment_data(&lb, &fb, order)?;
        let m_sum = moment_data(&la.add(&lb)?, &fa.add(&fb)?, order)?;
        let mut reports = vec![check_linearization_series(&m_a, &m_b, &m_sum, order)?];
        for (name, m, pair) in [("a", &m_a, &pa), ("b", &m_b, &pb)] {
            let r = cfree_r_transform(m)?;
            reports.push(CheckReport::compare(
                "r_at_zero_is_phi_mean",
                r.coeffs()[0],
                pair.phi_value(),
                1.0,
                EXACT_TOL,
                json!({ "element": name }),
            ));
            reports.push(CheckReport::gap(
                "r_of_k_series_identity",
                r_of_k_residual(m)?,
                1.0 + r.max_abs_coeff(),
                EXACT_TOL,
                json!({ "element": name }),
            ));
        }
        Ok(reports)
    })))
}

/// `R_{a+b} = R_a + R_b` at points of a circle, on free-copy realizations,
/// together with the gap `|t − t₃|`.
fn linearization_analytic_suite(cfg: &SuiteConfig) -> Result<(Vec<CheckReport>, Vec<LinearizationTrace>)> {
    let ctx = free_copy_context(cfg)?;
    let (h, k) = (cfg.dims[0], cfg.dims[1]);
    let results = per_trial(cfg, |rng| {
        let make = |side: Index, rng: &mut ChaCha8Rng| -> Result<TwoStateElement> {
            let op = rho(&random_self_adjoint(h, rng), &random_self_adjoint(k, rng), side, &ctx)?;
            TwoStateElement::on_one_space(op, ctx.xi(), ctx.eta_tilde())
        };
        let a = make(Alpha, rng)?;
        let b = make(Beta, rng)?;
        let sum = a.sum(&b)?;
        let radius = [&a, &b, &sum]
            .iter()
            .map(|e| 1.0 / (6.0 * e.norm_bound().max(f64::MIN_POSITIVE)))
            .fold(f64::INFINITY, f64::min);
        let points: Vec<Complex64> = (0..CIRCLE_POINTS)
            .map(|j| Complex64::from_polar(radius / 2.0, std::f64::consts::TAU * j as f64 / CIRCLE_POINTS as f64))
            .collect();
        let per_point: Vec<Result<(Vec<CheckReport>, LinearizationTrace)>> = points
            .par_iter()
            .map(|&z| check_linearization_analytic(&a, &b, &sum, z, LINEARIZATION_TOL, cfg.tol))
            .collect();
        let mut reports = Vec::new();
        let mut rows = Vec::new();
        for (j, r) in per_point.into_iter().enumerate() {
            let (reps, row) = r?;
            reports.extend(reps.into_iter().map(|rep| rep.with_context("point", json!(j))));
            rows.push(row);
        }
        Ok((reports, rows))
    });
    let mut traces = Vec::new();
    let split: Vec<(usize, Result<Vec<CheckReport>>)> = results
        .into_iter()
        .map(|(t, r)| {
            (
                t,
                r.map(|(reports, rows)| {
                    traces.extend(rows);
                    reports
                }),
            )
        })
        .collect();
    Ok((collect_reports(split), traces))
}

/// The centered-resolvent lemma and the `h̃_{a+b}` identity on operator-model
/// c-free pairs, at half the admissible radii. Mixed resolvent words are cut
/// at the basis depth; residuals near 1e-9 need depth 10.
fn haagerup_suite(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    use rand::Rng;
    let spaces = cfg.spaces()?;
    let h = h_basis(spaces, cfg.depth);
    let k = k_basis(spaces, cfg.depth);
    Ok(collect_reports(per_trial(cfg, |rng| {
        let a = TwoStateElement::from_cfree_pair(&random_pair(Alpha, &spaces, rng), &h, &k)?;
        let b = TwoStateElement::from_cfree_pair(&random_pair(Beta, &spaces, rng), &h, &k)?;
        let mut angle = || Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
        let half_radius = |e: &TwoStateElement| 1.0 / (8.0 * e.norm_bound().max(f64::MIN_POSITIVE));
        let t1 = angle() * half_radius(&a);
        let t2 = angle() * half_radius(&b);
        let rho_max = rho_bound(&a, &b, t1, t2)?;
        let rho = if rho_max.is_finite() { angle() * (0.5 * rho_max) } else { angle() };
        let mut reports = check_centered_resolvent_identity(&a, &b, t1, t2, rho, cfg.tol)?;
        let t1_sum = angle() * half_radius(&a);
        reports.extend(check_htilde_sum_identity(&a, &b, t1_sum, cfg.tol)?);
        Ok(reports)
    })))
}
