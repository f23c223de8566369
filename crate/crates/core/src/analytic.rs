//! Closed-form performance of the spherical-test detector.
//!
//! Under H0 the first two exact moments of `T_ST` are matched to a
//! Beta law; under H1 the moments use a Gamma fit to `tr R'`. Exact
//! CDFs are provided for the two-sensor case (both hypotheses) and the
//! three-sensor null.
//!
//! Moments are accumulated as sums of `ln1p` of small ratios rather than
//! differences of log-gammas: the Beta fit divides by the variance
//! `M₂ − M₁²`, which is O(1/N²) and would otherwise lose most of its digits.

use crate::error::{domain, Error, Result};
use crate::linalg::CovarianceModel;
use crate::special::{
    inverse_regularized_incomplete_beta, log_beta, log_gamma, log_regularized_incomplete_beta, pochhammer_signed,
    regularized_incomplete_beta, SignedLogValue,
};
use crate::types::{Hypothesis, RocCurve, RocPoint, RocSource};
use crate::DetectorKind;

/// Highest moment order exposed.
pub const MAX_MOMENT_ORDER: usize = 4;

/// Parameters of a moment-matched Beta law on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
    pub hypothesis: Hypothesis,
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64, hypothesis: Hypothesis) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0) || !alpha.is_finite() || !beta.is_finite() {
            return domain(format!("Beta parameters must be finite and positive, got ({alpha}, {beta})"));
        }
        Ok(Self { alpha, beta, hypothesis })
    }

    pub fn cdf(&self, y: f64) -> Result<f64> {
        regularized_incomplete_beta(y, self.alpha, self.beta)
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        inverse_regularized_incomplete_beta(p, self.alpha, self.beta)
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    /// Both parameters rounded to the nearest integer (at least 1), which
    /// turns the CDF into a polynomial in y.
    pub fn rounded(&self) -> Self {
        Self { alpha: self.alpha.round().max(1.0), beta: self.beta.round().max(1.0), hypothesis: self.hypothesis }
    }
}

/// Moments E[T^n], n = 1, 2, … of a statistic supported on [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    pub values: Vec<f64>,
    pub hypothesis: Hypothesis,
}

impl MomentSequence {
    /// Moment of order `n` (1-based).
    pub fn get(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|i| self.values.get(i)).copied()
    }
}

fn check_kn(k: usize, n: usize) -> Result<()> {
    if k == 0 {
        return domain("K must be at least 1");
    }
    if n < k {
        return domain(format!("N must be at least K for a nonsingular Wishart matrix (K = {k}, N = {n})"));
    }
    Ok(())
}

fn check_order(order: usize) -> Result<()> {
    if order == 0 {
        return domain("moment order must be at least 1");
    }
    Ok(())
}

/// ln(M_{m+1}/M_m) under H0.
///
/// M_{m+1}/M_m = K^K Π_j (N+m−j) / Π_j (K(N+m)+j), paired factor by factor.
fn h0_log_step(k: usize, n: usize, m: usize) -> f64 {
    let x = (k * (n + m)) as f64;
    let kp1 = (k + 1) as f64;
    (1..k).map(|j| (-kp1 * j as f64 / (x + j as f64)).ln_1p()).sum()
}

/// ln M_n, the log of the exact n-th moment of T_ST under H0.
pub fn h0_log_moment(k: usize, n: usize, order: usize) -> Result<f64> {
    check_kn(k, n)?;
    check_order(order)?;
    Ok((0..order).map(|m| h0_log_step(k, n, m)).sum())
}

/// Exact n-th moment of T_ST under H0:
/// M_n = Γ(KN)/Γ_K(N) · K^{Kn} Γ_K(N+n)/Γ(K(N+n)).
pub fn h0_moment(k: usize, n: usize, order: usize) -> Result<f64> {
    Ok(h0_log_moment(k, n, order)?.exp())
}

pub fn h0_moments(k: usize, n: usize, max_order: usize) -> Result<MomentSequence> {
    let values = (1..=max_order).map(|o| h0_moment(k, n, o)).collect::<Result<_>>()?;
    Ok(MomentSequence { values, hypothesis: Hypothesis::H0 })
}

/// Beta(α, β) with mean `m1` and second moment `m2`.
pub fn beta_match(m1: f64, m2: f64) -> Result<(f64, f64)> {
    if !(m1 > 0.0 && m1 < 1.0) {
        return domain(format!("first moment must lie in (0,1), got {m1}"));
    }
    if !(m2 < m1) {
        return domain(format!("second moment {m2} must be below the first moment {m1}"));
    }
    let var = m2 - m1 * m1;
    if !(var > 0.0) {
        return domain(format!("moments ({m1}, {m2}) have nonpositive variance"));
    }
    let common = (m1 - m2) / var;
    Ok((m1 * common, (1.0 - m1) * common))
}

/// [`beta_match`] from ln M₁ and the two log-differences
/// `d1 = ln M₂ − ln M₁` and `d2 = ln M₂ − 2 ln M₁`, each supplied directly
/// so the caller can compute them without cancellation.
fn beta_match_logs(l1: f64, d1: f64, d2: f64, hypothesis: Hypothesis) -> Result<BetaParams> {
    if !(l1 < 0.0) || !(d1 < 0.0) || !(d2 > 0.0) {
        return domain(format!(
            "log-moments (ln M1 = {l1}, ln M2/M1 = {d1}, ln M2/M1^2 = {d2}) do not define a Beta law"
        ));
    }
    let alpha = -d1.exp_m1() / d2.exp_m1();
    let beta = alpha * (-l1.exp_m1()) / l1.exp();
    BetaParams::new(alpha, beta, hypothesis)
}

/// (α₀, β₀) of the H0 Beta approximation for K sensors and N samples.
pub fn h0_beta(k: usize, n: usize) -> Result<BetaParams> {
    check_kn(k, n)?;
    if k < 2 {
        return domain("the null law of T_ST is degenerate for K = 1");
    }
    let step0 = h0_log_step(k, n, 0);
    let step1 = h0_log_step(k, n, 1);
    let d2: f64 = {
        let x0 = (k * n) as f64;
        let x1 = (k * (n + 1)) as f64;
        let kp1 = (k + 1) as f64;
        (1..k)
            .map(|j| {
                let j = j as f64;
                // ln1p(a1) − ln1p(a0) = ln1p((a1 − a0)/(1 + a0))
                let a0 = -kp1 * j / (x0 + j);
                let diff = kp1 * j * (k as f64) / ((x1 + j) * (x0 + j));
                (diff / (1.0 + a0)).ln_1p()
            })
            .sum()
    };
    beta_match_logs(step0, step1, d2, Hypothesis::H0)
}

/// Beta-approximated null CDF of T_ST.
pub fn h0_cdf_beta(y: f64, k: usize, n: usize) -> Result<f64> {
    h0_beta(k, n)?.cdf(y)
}

/// Exact null CDF for K = 2: I_y(N−1, 3/2).
pub fn h0_cdf_exact_k2(y: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return domain(format!("the K = 2 null law requires N >= 2, got {n}"));
    }
    regularized_incomplete_beta(y, n as f64 - 1.0, 1.5)
}

const K3_TOL: f64 = 1e-14;
const K3_MAX_TERMS: usize = 20_000;

/// Exact null CDF for K = 3 as a series of incomplete Beta functions.
///
/// The weights w_k = c (8/3)_k (7/3)_k / (k! (4)_k) · B(N−1, k+4) sum to one,
/// so the series is evaluated in the complementary form
/// F(y) = 1 − Σ_k w_k (1 − I_y(N−1, k+4)), whose terms decay geometrically in
/// (1 − y) on top of the weights' own power-law decay.
pub fn h0_cdf_exact_k3(y: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return domain(format!("the K = 3 null law requires N >= 3, got {n}"));
    }
    if y.is_nan() {
        return domain("y is NaN");
    }
    let y = y.clamp(0.0, 1.0);
    if y == 0.0 {
        return Ok(0.0);
    }
    if y == 1.0 {
        return Ok(1.0);
    }
    let nf = n as f64;
    let log_c = log_gamma(nf + 1.0 / 3.0)? + log_gamma(nf + 2.0 / 3.0)?
        - 6f64.ln()
        - log_gamma(nf - 1.0)?
        - log_gamma(nf - 2.0)?;
    let a = nf - 1.0;
    let mut log_coef = 0.0; // ln[(8/3)_k (7/3)_k / (k! (4)_k)]
    let mut upper = 0.0;
    for k in 0..K3_MAX_TERMS {
        let kf = k as f64;
        let b = kf + 4.0;
        let log_w = log_c + log_coef + log_beta(a, b)?;
        let log_tail = log_regularized_incomplete_beta(1.0 - y, b, a)?; // 1 − I_y(a, b)
        let term = (log_w + log_tail).exp();
        upper += term;
        if term <= K3_TOL * upper.max(f64::MIN_POSITIVE) && k > 0 {
            return Ok((1.0 - upper).clamp(0.0, 1.0));
        }
        log_coef += ((8.0 / 3.0 + kf) * (7.0 / 3.0 + kf) / ((kf + 1.0) * (4.0 + kf))).ln();
    }
    Err(Error::Convergence(format!(
        "K = 3 null CDF series at y = {y}, N = {n} did not converge in {K3_MAX_TERMS} terms"
    )))
}

/// False-alarm probability of the rule "declare H1 when T_ST < ζ".
pub fn pfa(zeta: f64, k: usize, n: usize) -> Result<f64> {
    h0_cdf_beta(zeta, k, n)
}

/// Threshold ζ with `pfa(ζ) = p`.
pub fn threshold_for_pfa(p: f64, k: usize, n: usize) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("pfa must lie in (0,1), got {p}"));
    }
    h0_beta(k, n)?.quantile(p)
}

/// Population eigenvalue summary used by the H1 moment approximation.
struct SpectrumShape {
    k: usize,
    /// (Σσ)²/Σσ², the Gamma shape per degree of freedom.
    c: f64,
    /// Σ ln(Kσ_j/Σσ), i.e. ln det of the trace-normalized Σ.
    log_det_normalized: f64,
}

fn spectrum_shape(eigs: &[f64]) -> Result<SpectrumShape> {
    if eigs.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return domain("population eigenvalues must be finite and positive");
    }
    let k = eigs.len();
    let s1: f64 = eigs.iter().sum();
    let s2: f64 = eigs.iter().map(|s| s * s).sum();
    let kf = k as f64;
    Ok(SpectrumShape { k, c: s1 * s1 / s2, log_det_normalized: eigs.iter().map(|&s| (kf * s / s1).ln()).sum() })
}

fn h1_log_moment_from_shape(shape: &SpectrumShape, n: usize, order: usize) -> Result<f64> {
    let k = shape.k;
    let np = (n + order) as f64;
    let kn = k * order;
    // a − Kn = c(N+n) − Kn
    if !(shape.c * np - kn as f64 > 0.0) {
        return domain(format!("Gamma-fit moment of order {order} undefined (a - Kn <= 0)"));
    }
    let mut acc = order as f64 * shape.log_det_normalized;
    for m in 0..order {
        for j in 0..k {
            let i = (m * k + j + 1) as f64;
            let shift = i / shape.c;
            let num = m as f64 - j as f64 - order as f64 + shift;
            acc += (num / (np - shift)).ln_1p();
        }
    }
    Ok(acc)
}

/// ln N_n, the log of the Gamma-fit approximation to E[T_ST^n] under H1.
pub fn h1_log_moment(model: &CovarianceModel, n: usize, order: usize) -> Result<f64> {
    check_kn(model.k(), n)?;
    check_order(order)?;
    h1_log_moment_from_shape(&spectrum_shape(model.sigma_eigs())?, n, order)
}

/// N_n = (K/b)^{Kn} Γ(a−Kn) Γ_K(N+n) det(Σ)^n / (Γ_K(N) Γ(a)), with
/// a = (N+n)(Σσ)²/Σσ² and b = Σσ²/Σσ recomputed for each order.
pub fn h1_moment(model: &CovarianceModel, n: usize, order: usize) -> Result<f64> {
    Ok(h1_log_moment(model, n, order)?.exp())
}

pub fn h1_moments(model: &CovarianceModel, n: usize, max_order: usize) -> Result<MomentSequence> {
    let values = (1..=max_order).map(|o| h1_moment(model, n, o)).collect::<Result<_>>()?;
    Ok(MomentSequence { values, hypothesis: Hypothesis::H1 })
}

/// (α₁, β₁) of the H1 Beta approximation.
pub fn h1_beta(model: &CovarianceModel, n: usize) -> Result<BetaParams> {
    check_kn(model.k(), n)?;
    if model.k() < 2 {
        return domain("T_ST is degenerate for K = 1");
    }
    let shape = spectrum_shape(model.sigma_eigs())?;
    let l1 = h1_log_moment_from_shape(&shape, n, 1)?;
    let l2 = h1_log_moment_from_shape(&shape, n, 2)?;
    beta_match_logs(l1, l2 - l1, l2 - 2.0 * l1, Hypothesis::H1)
}

pub fn h1_cdf_beta(y: f64, model: &CovarianceModel, n: usize) -> Result<f64> {
    h1_beta(model, n)?.cdf(y)
}

const K2_REL_GAP_FLOOR: f64 = 1e-6;
const K2_TOL: f64 = 1e-13;
const K2_MAX_TERMS: usize = 100_000;

/// Exact H1 CDF of T_ST for two sensors with population eigenvalues
/// `sigma1 >= sigma2 > 0`.
///
/// G(y) = 1 − C Σ_k (3−2N−2k)_{2k−1}/(2k−1)! · δ^{2k} · B_{1−y}(k+½, N−1),
/// δ = (σ₁−σ₂)/(σ₁+σ₂). The k = 0 term carries 1/(−1)! = 1/Γ(0) = 0 and
/// vanishes, so summation starts at k = 1. Below a relative gap of 1e-6 the
/// null law is returned.
pub fn h1_cdf_exact_k2(y: f64, sigma1: f64, sigma2: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return domain(format!("the K = 2 law requires N >= 2, got {n}"));
    }
    if !(sigma2 > 0.0) || !sigma1.is_finite() {
        return domain(format!("population eigenvalues must be positive, got ({sigma1}, {sigma2})"));
    }
    if sigma1 < sigma2 {
        return domain(format!("expected sigma1 >= sigma2, got ({sigma1}, {sigma2})"));
    }
    if y.is_nan() {
        return domain("y is NaN");
    }
    let delta = (sigma1 - sigma2) / (sigma1 + sigma2);
    if delta <= K2_REL_GAP_FLOOR {
        return h0_cdf_exact_k2(y, n);
    }
    let y = y.clamp(0.0, 1.0);
    if y == 1.0 {
        return Ok(1.0);
    }
    let nf = n as f64;
    // C = −4 (σ₁σ₂)^N (σ₁+σ₂)^{2−2N} / (B(N, N−1) (σ₁−σ₂)²), written with δ
    // to stay scale-free: (σ₁σ₂)^N (σ₁+σ₂)^{−2N} = ((1 − δ²)/4)^N.
    let log_c_abs =
        4f64.ln() + nf * ((-delta * delta).ln_1p() - 4f64.ln()) - log_beta(nf, nf - 1.0)? - 2.0 * delta.ln();
    let c = SignedLogValue { log_abs: log_c_abs, sign: -1 };
    let log_delta = delta.ln();
    let w = 1.0 - y;
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    for k in 1..=K2_MAX_TERMS {
        let kf = k as f64;
        let odd = 2 * k as i64 - 1;
        let poch = pochhammer_signed(3.0 - 2.0 * nf - 2.0 * kf, odd)?;
        let inv_fact = SignedLogValue { log_abs: -log_gamma(2.0 * kf)?, sign: 1 };
        let a = kf + 0.5;
        let b = nf - 1.0;
        let log_b_inc = log_regularized_incomplete_beta(w, a, b)? + log_beta(a, b)?;
        let power = SignedLogValue { log_abs: 2.0 * kf * log_delta + log_b_inc, sign: 1 };
        let term = (c * poch * inv_fact * power).to_f64();
        sum += term;
        let mag = term.abs();
        if mag <= K2_TOL * sum.abs().max(f64::MIN_POSITIVE) && mag <= prev {
            return Ok((1.0 - sum).clamp(0.0, 1.0));
        }
        prev = mag;
    }
    Err(Error::Convergence(format!(
        "K = 2 H1 series at y = {y}, sigma = ({sigma1}, {sigma2}), N = {n} did not converge in {K2_MAX_TERMS} terms"
    )))
}

/// Detection probability at threshold ζ: exact for K = 2, Beta-approximated otherwise.
pub fn pd(zeta: f64, model: &CovarianceModel, n: usize) -> Result<f64> {
    if model.k() == 2 {
        check_kn(2, n)?;
        let e = model.sigma_eigs();
        h1_cdf_exact_k2(zeta, e[0], e[1], n)
    } else {
        h1_cdf_beta(zeta, model, n)
    }
}

/// Analytic ST ROC: Pd = G(F⁻¹(Pfa)) on a strictly increasing grid in (0, 1).
pub fn roc_analytic(model: &CovarianceModel, n: usize, pfa_grid: &[f64]) -> Result<RocCurve> {
    roc_analytic_with(model, n, pfa_grid, false)
}

/// [`roc_analytic`] with optional rounding of both Beta laws to integer parameters.
pub fn roc_analytic_with(model: &CovarianceModel, n: usize, pfa_grid: &[f64], round_params: bool) -> Result<RocCurve> {
    if pfa_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return domain("pfa grid must be strictly increasing");
    }
    if let Some(p) = pfa_grid.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
        return domain(format!("pfa must lie in (0,1), got {p}"));
    }
    let k = model.k();
    let null = h0_beta(k, n)?;
    let null = if round_params { null.rounded() } else { null };
    let alt = if round_params { Some(h1_beta(model, n)?.rounded()) } else { None };
    let mut points = Vec::with_capacity(pfa_grid.len());
    let mut last = 0.0_f64;
    for &p in pfa_grid {
        let zeta = null.quantile(p)?;
        let d = match alt {
            Some(b) => b.cdf(zeta)?,
            None => pd(zeta, model, n)?,
        };
        // Monotone by construction; absorb last-ulp jitter.
        last = last.max(d);
        points.push(RocPoint { pfa: p, pd: last });
    }
    Ok(RocCurve { detector: DetectorKind::St, source: RocSource::Analytic, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::multivariate_log_gamma;
    use proptest::prelude::*;

    /// Straight transcription of the moment formula with log-gammas.
    fn naive_h0_moment(k: usize, n: usize, order: usize) -> f64 {
        let (kf, nf, of) = (k as f64, n as f64, order as f64);
        (log_gamma(kf * nf).unwrap() - multivariate_log_gamma(k, nf).unwrap()
            + kf * of * kf.ln()
            + multivariate_log_gamma(k, nf + of).unwrap()
            - log_gamma(kf * (nf + of)).unwrap())
        .exp()
    }

    fn naive_h1_moment(eigs: &[f64], n: usize, order: usize) -> f64 {
        let k = eigs.len();
        let (kf, nf, of) = (k as f64, n as f64, order as f64);
        let s1: f64 = eigs.iter().sum();
        let s2: f64 = eigs.iter().map(|s| s * s).sum();
        let a = (nf + of) * s1 * s1 / s2;
        let b = s2 / s1;
        let log_det: f64 = eigs.iter().map(|s| s.ln()).sum();
        (kf * of * (kf / b).ln()
            + log_gamma(a - kf * of).unwrap()
            + multivariate_log_gamma(k, nf + of).unwrap()
            + of * log_det
            - multivariate_log_gamma(k, nf).unwrap()
            - log_gamma(a).unwrap())
        .exp()
    }

    #[test]
    fn h0_moment_examples() {
        assert_eq!(h0_moment(1, 10, 3).unwrap(), 1.0);
        assert!((h0_moment(2, 4, 1).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((h0_moment(2, 4, 2).unwrap() - 16.0 / 33.0).abs() < 1e-15);
        assert!(h0_moment(4, 3, 1).is_err());
        assert!(h0_moment(2, 4, 0).is_err());
    }

    #[test]
    fn h0_moment_matches_gamma_formula() {
        for &(k, n) in &[(2, 4), (3, 7), (4, 20), (4, 100), (8, 50)] {
            for o in 1..=MAX_MOMENT_ORDER {
                let a = h0_moment(k, n, o).unwrap();
                let b = naive_h0_moment(k, n, o);
                assert!((a - b).abs() <= 1e-11 * b, "K={k} N={n} n={o}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn moments_decrease() {
        let m = h0_moments(4, 20, MAX_MOMENT_ORDER).unwrap();
        assert!(m.values.windows(2).all(|w| w[1] < w[0]));
        assert!(m.get(2).unwrap() > m.get(1).unwrap().powi(2));
        assert_eq!(m.get(0), None);
    }

    #[test]
    fn beta_match_examples() {
        let (a, b) = beta_match(2.0 / 3.0, 16.0 / 33.0).unwrap();
        assert!((a - 3.0).abs() < 1e-12 && (b - 1.5).abs() < 1e-12);
        let (a, b) = beta_match(0.5, 1.0 / 3.0).unwrap();
        assert!((a - 1.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
        assert!((a / (a + b) - 0.5).abs() < 1e-12);
        assert!(beta_match(0.5, 0.25).is_err());
        assert!(beta_match(0.5, 0.6).is_err());
        assert!(beta_match(1.2, 0.6).is_err());
    }

    #[test]
    fn null_alpha_values() {
        for &(n, want) in &[(400, 395.4), (200, 195.4), (100, 95.5)] {
            let p = h0_beta(4, n).unwrap();
            assert!((p.alpha - want).abs() <= 0.05, "N={n}: {}", p.alpha);
        }
    }

    #[test]
    fn two_sensor_null_fit_is_exact() {
        for &n in &[4usize, 10, 50, 400] {
            let p = h0_beta(2, n).unwrap();
            assert!((p.alpha - (n as f64 - 1.0)).abs() < 1e-9, "N={n}: {}", p.alpha);
            assert!((p.beta - 1.5).abs() < 1e-9, "N={n}: {}", p.beta);
            let mut worst = 0.0_f64;
            for i in 0..1000 {
                let y = i as f64 / 999.0;
                worst = worst.max((h0_cdf_beta(y, 2, n).unwrap() - h0_cdf_exact_k2(y, n).unwrap()).abs());
            }
            assert!(worst < 1e-12, "N={n}: {worst}");
        }
    }

    #[test]
    fn exact_k2_null_endpoints() {
        assert_eq!(h0_cdf_exact_k2(0.0, 4).unwrap(), 0.0);
        assert_eq!(h0_cdf_exact_k2(1.0, 4).unwrap(), 1.0);
        assert_eq!(h0_cdf_exact_k2(3.0, 4).unwrap(), 1.0);
        assert!(h0_cdf_exact_k2(0.5, 1).is_err());
    }

    #[test]
    fn exact_k3_null() {
        assert_eq!(h0_cdf_exact_k3(0.0, 20).unwrap(), 0.0);
        for &n in &[5usize, 6, 20, 50] {
            let near_one = h0_cdf_exact_k3(1.0 - 1e-9, n).unwrap();
            assert!((near_one - 1.0).abs() < 1e-10, "N={n}: {near_one}");
            let mut last = 0.0;
            for i in 1..200 {
                let v = h0_cdf_exact_k3(i as f64 / 200.0, n).unwrap();
                assert!(v >= last - 1e-14 && (0.0..=1.0).contains(&v));
                last = v;
            }
        }
        assert!(h0_cdf_exact_k3(0.5, 2).is_err());
    }

    #[test]
    fn exact_k3_mean_matches_moment() {
        // E[T] = ∫ (1 − F(y)) dy, by composite Simpson on [0, 1].
        for &n in &[6usize, 20] {
            let m = 2000;
            let h = 1.0 / m as f64;
            let mut s = 0.0;
            for i in 0..=m {
                let y = i as f64 * h;
                let f = 1.0 - h0_cdf_exact_k3(y, n).unwrap();
                let w = if i == 0 || i == m {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                s += w * f;
            }
            let mean = s * h / 3.0;
            assert!((mean - h0_moment(3, n, 1).unwrap()).abs() < 1e-8, "N={n}: {mean}");
        }
    }

    #[test]
    fn threshold_round_trip() {
        for &(k, n) in &[(2usize, 10usize), (4, 100), (8, 50), (4, 20)] {
            for &p in &[1e-6, 1e-4, 1e-2, 0.5, 0.99] {
                let z = threshold_for_pfa(p, k, n).unwrap();
                assert!(z > 0.0 && z < 1.0);
                assert!((pfa(z, k, n).unwrap() - p).abs() <= 1e-10, "K={k} N={n} p={p}");
            }
        }
        assert!(threshold_for_pfa(0.0, 4, 20).is_err());
        assert!(threshold_for_pfa(1.0, 4, 20).is_err());
    }

    #[test]
    fn h1_collapses_to_h0_for_spherical_sigma() {
        for &(k, n) in &[(2usize, 4usize), (3, 9), (4, 20), (4, 400), (8, 50)] {
            for &s in &[1.0, 0.37, 12.5] {
                let model = CovarianceModel::spherical(k, s).unwrap();
                for o in 1..=MAX_MOMENT_ORDER {
                    let a = h1_moment(&model, n, o).unwrap();
                    let b = h0_moment(k, n, o).unwrap();
                    assert!((a - b).abs() <= 1e-12 * b, "K={k} N={n} o={o}: {a} vs {b}");
                }
                let p0 = h0_beta(k, n).unwrap();
                let p1 = h1_beta(&model, n).unwrap();
                assert!((p0.alpha - p1.alpha).abs() <= 1e-9 * p0.alpha);
                assert!((p0.beta - p1.beta).abs() <= 1e-9 * p0.beta);
            }
        }
        let model = CovarianceModel::spherical(2, 1.0).unwrap();
        assert!((h1_moment(&model, 4, 1).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn h1_moment_matches_gamma_formula() {
        for eigs in [vec![2.0, 1.0], vec![3.1, 1.4, 1.0, 1.0], vec![9.0, 4.0, 2.0, 1.5, 1.0, 1.0]] {
            let model = CovarianceModel::diagonal(&eigs).unwrap();
            for &n in &[10usize, 50, 200] {
                if n < eigs.len() {
                    continue;
                }
                for o in 1..=MAX_MOMENT_ORDER {
                    let a = h1_moment(&model, n, o).unwrap();
                    let b = naive_h1_moment(&eigs, n, o);
                    assert!((a - b).abs() <= 1e-10 * b, "{eigs:?} N={n} o={o}: {a} vs {b}");
                }
                let m = h1_moments(&model, n, 3).unwrap();
                assert!(m.values.windows(2).all(|w| w[1] < w[0]));
            }
        }
    }

    /// G(y) = 1 − ∫_0^{√(1−y)} f_W(w) dw with the density of W = √(1 − T)
    /// obtained by change of variables from the joint eigenvalue law:
    /// f_W(w) = 4 (σ₁σ₂)^N (σ₁+σ₂)^{1−2N} / (B(N,N−1)(σ₁−σ₂))
    ///          · w (1−w²)^{N−2} [(1−δw)^{1−2N} − (1+δw)^{1−2N}].
    fn k2_h1_cdf_by_quadrature(y: f64, s1: f64, s2: f64, n: usize) -> f64 {
        let nf = n as f64;
        let delta = (s1 - s2) / (s1 + s2);
        let log_pref = 4f64.ln() + nf * (s1 * s2).ln() + (1.0 - 2.0 * nf) * (s1 + s2).ln()
            - log_beta(nf, nf - 1.0).unwrap()
            - (s1 - s2).ln();
        let density = |w: f64| {
            let bracket = (1.0 - delta * w).powf(1.0 - 2.0 * nf) - (1.0 + delta * w).powf(1.0 - 2.0 * nf);
            log_pref.exp() * w * (1.0 - w * w).powf(nf - 2.0) * bracket
        };
        let upper = (1.0 - y).sqrt();
        let m = 20_000;
        let h = upper / m as f64;
        let mut s = density(0.0) + density(upper);
        for i in 1..m {
            s += density(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        1.0 - s * h / 3.0
    }

    #[test]
    fn exact_k2_h1_matches_density_quadrature() {
        for &(s1, s2, n) in &[(2.0, 1.0, 10usize), (5.0, 1.0, 4), (1.3, 1.0, 30), (4.0, 0.5, 60)] {
            for &y in &[0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
                let series = h1_cdf_exact_k2(y, s1, s2, n).unwrap();
                let quad = k2_h1_cdf_by_quadrature(y, s1, s2, n);
                assert!((series - quad).abs() < 1e-9, "σ=({s1},{s2}) N={n} y={y}: {series} vs {quad}");
            }
        }
    }

    #[test]
    fn exact_k2_h1_edges() {
        assert_eq!(h1_cdf_exact_k2(1.0, 2.0, 1.0, 10).unwrap(), 1.0);
        assert!(h1_cdf_exact_k2(0.0, 2.0, 1.0, 10).unwrap().abs() < 1e-9);
        assert!(h1_cdf_exact_k2(0.5, 1.0, 2.0, 10).is_err());
        // scale free
        let a = h1_cdf_exact_k2(0.6, 2.0, 1.0, 10).unwrap();
        let b = h1_cdf_exact_k2(0.6, 20.0, 10.0, 10).unwrap();
        assert!((a - b).abs() < 1e-13);
        // near-spherical falls back to the null law
        let g = h1_cdf_exact_k2(0.6, 1.0 + 1e-9, 1.0, 10).unwrap();
        assert_eq!(g, h0_cdf_exact_k2(0.6, 10).unwrap());
        // large N, strong correlation
        let v = h1_cdf_exact_k2(0.5, 50.0, 1.0, 400).unwrap();
        assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn pd_limits_and_monotonicity() {
        let model = CovarianceModel::diagonal(&[2.2, 1.6, 1.1, 1.0]).unwrap();
        assert_eq!(pd(1.0, &model, 100).unwrap(), 1.0);
        assert_eq!(pd(0.0, &model, 100).unwrap(), 0.0);
        let mut last = 0.0;
        for i in 0..1000 {
            let v = pd(i as f64 / 999.0, &model, 100).unwrap();
            assert!(v >= last && v <= 1.0);
            last = v;
        }
        let two = CovarianceModel::diagonal(&[2.0, 1.0]).unwrap();
        assert_eq!(pd(0.4, &two, 10).unwrap(), h1_cdf_exact_k2(0.4, 2.0, 1.0, 10).unwrap());
    }

    #[test]
    fn h1_cdf_beta_equals_null_for_spherical() {
        let model = CovarianceModel::spherical(4, 3.0).unwrap();
        for i in 0..=100 {
            let y = i as f64 / 100.0;
            assert!((h1_cdf_beta(y, &model, 50).unwrap() - h0_cdf_beta(y, 4, 50).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_roc_is_monotone() {
        let model = CovarianceModel::diagonal(&[1.9, 1.4, 1.05, 1.0]).unwrap();
        let grid: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
        let roc = roc_analytic(&model, 200, &grid).unwrap();
        assert!(roc.points.windows(2).all(|w| w[1].pd >= w[0].pd));
        assert!(roc.points.iter().zip(&grid).all(|(p, g)| p.pfa == *g && p.pd >= *g));
        let roc = roc_analytic(&model, 200, &[1.0 - 1e-12]).unwrap();
        assert!(roc.points[0].pd > 1.0 - 1e-9);
        let rounded = roc_analytic_with(&model, 200, &grid, true).unwrap();
        assert!(rounded.points.windows(2).all(|w| w[1].pd >= w[0].pd));
        assert!(roc_analytic(&model, 200, &[0.5, 0.2]).is_err());
        assert!(roc_analytic(&model, 200, &[0.0, 0.2]).is_err());
    }

    proptest! {
        #[test]
        fn threshold_inverts_pfa(k in 2usize..10, extra in 0usize..300, p in 1e-6f64..0.999) {
            let n = k + extra;
            let z = threshold_for_pfa(p, k, n).unwrap();
            prop_assert!((pfa(z, k, n).unwrap() - p).abs() <= 1e-10);
        }

        #[test]
        fn null_moments_are_a_valid_beta_sequence(k in 2usize..10, extra in 0usize..300) {
            let n = k + extra;
            let m = h0_moments(k, n, MAX_MOMENT_ORDER).unwrap();
            prop_assert!(m.values.windows(2).all(|w| w[1] < w[0]));
            prop_assert!(m.values[1] > m.values[0] * m.values[0]);
            let p = h0_beta(k, n).unwrap();
            prop_assert!((p.mean() - m.values[0]).abs() <= 1e-12);
        }

        #[test]
        fn alternative_fit_is_scale_free(e in prop::collection::vec(1.0f64..20.0, 2..7), c in 0.01f64..100.0) {
            let n = 60;
            let a = CovarianceModel::diagonal(&e).unwrap();
            let scaled: Vec<f64> = e.iter().map(|x| x * c).collect();
            let b = CovarianceModel::diagonal(&scaled).unwrap();
            let (pa, pb) = (h1_beta(&a, n).unwrap(), h1_beta(&b, n).unwrap());
            prop_assert!((pa.alpha - pb.alpha).abs() <= 1e-9 * pa.alpha);
            prop_assert!((pa.beta - pb.beta).abs() <= 1e-9 * pa.beta);
        }
    }
}
