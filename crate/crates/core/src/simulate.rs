//! Monte-Carlo engine: statistic samples under both hypotheses, empirical
//! CDFs and ROCs, and detection probability at a target false-alarm rate.
//!
//! Trial `t` under H0 reads stream `(seed, H0, t)`; under H1 with channel
//! draw `d` it reads `(seed, H1, d·2³² + t)`, and the channels of draw `d`
//! come from `(seed, Channel, d)`. Results are therefore identical for any
//! thread count, and runs that differ only in SNR or noise uncertainty reuse
//! the same Gaussian draws.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detectors::{DetectorKind, H1Direction};
use crate::error::{domain, Result};
use crate::linalg::{build_covariance_with, db_to_linear, eigenvalues_unchecked, ChannelMode, CovarianceModel};
use crate::rng::{stream, Domain};
use crate::types::{Hypothesis, RocCurve, RocPoint, RocSource};

/// Number of equally spaced thresholds in an empirical ROC sweep.
pub const ROC_THRESHOLDS: usize = 1000;

pub const DEFAULT_TRIALS: usize = 100_000;

const MAX_TRIALS_PER_DRAW: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub sigma2: f64,
    pub snrs_db: Vec<f64>,
    #[serde(default)]
    pub mu_db: f64,
    pub trials: usize,
    pub seed: u64,
    pub detectors: Vec<DetectorKind>,
    #[serde(default)]
    pub channel_mode: ChannelMode,
}

impl Scenario {
    pub fn new(k: usize, n: usize, snrs_db: Vec<f64>) -> Self {
        Self {
            k,
            n,
            sigma2: 1.0,
            snrs_db,
            mu_db: 0.0,
            trials: DEFAULT_TRIALS,
            seed: 1,
            detectors: DetectorKind::ALL.to_vec(),
            channel_mode: ChannelMode::Independent,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return domain(format!("K must be at least 2, got {}", self.k));
        }
        if self.n < 1 {
            return domain("N must be at least 1");
        }
        if self.trials < 1 {
            return domain("trials must be at least 1");
        }
        if self.trials as u64 >= MAX_TRIALS_PER_DRAW {
            return domain(format!("trials must be below {MAX_TRIALS_PER_DRAW}"));
        }
        if !(self.sigma2 > 0.0) || !self.sigma2.is_finite() {
            return domain(format!("sigma2 must be positive, got {}", self.sigma2));
        }
        if !(self.mu_db >= 0.0) || !self.mu_db.is_finite() {
            return domain(format!("mu_db must be finite and >= 0, got {}", self.mu_db));
        }
        if let Some(s) = self.snrs_db.iter().find(|s| s.is_nan() || **s == f64::INFINITY) {
            return domain(format!("SNR must be below +inf dB, got {s}"));
        }
        if self.detectors.is_empty() {
            return domain("at least one detector is required");
        }
        Ok(())
    }

    /// Unit-noise model for channel draw `draw`.
    pub fn channel_model(&self, draw: u64) -> Result<CovarianceModel> {
        build_covariance_with(
            self.k,
            1.0,
            &self.snrs_db,
            self.channel_mode,
            &mut stream(self.seed, Domain::Channel, draw),
        )
    }
}

/// Noise powers `(ρσ², σ²/ρ)` under H0 and H1 with `ρ = 10^{μ/10}`.
pub fn effective_noise_powers(sigma2: f64, mu_db: f64) -> Result<(f64, f64)> {
    if !(mu_db >= 0.0) {
        return domain(format!("mu_db must be >= 0, got {mu_db}"));
    }
    let rho = db_to_linear(mu_db);
    Ok((rho * sigma2, sigma2 / rho))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticSample {
    pub detector: DetectorKind,
    pub hypothesis: Hypothesis,
    pub values: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
/// One sample per detector from `trials` draws of `R = power · (Σ₁^{1/2}G)(Σ₁^{1/2}G)^†`.
fn run_trials(
    model: &CovarianceModel,
    power: f64,
    n: usize,
    trials: usize,
    seed: u64,
    domain: Domain,
    offset: u64,
    detectors: &[DetectorKind],
    hypothesis: Hypothesis,
) -> Vec<StatisticSample> {
    let rows: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(seed, domain, offset + t);
            let r = model.sample_covariance(n, &mut rng).scale(power);
            let eigs = eigenvalues_unchecked(&r);
            detectors.iter().map(|d| d.evaluate(&eigs)).collect()
        })
        .collect();
    detectors
        .iter()
        .enumerate()
        .map(|(i, &detector)| StatisticSample { detector, hypothesis, values: rows.iter().map(|r| r[i]).collect() })
        .collect()
}

/// Statistic samples under `hypothesis` with channel draw 0.
pub fn run_hypothesis(scenario: &Scenario, hypothesis: Hypothesis) -> Result<Vec<StatisticSample>> {
    run_hypothesis_with(scenario, hypothesis, 0, scenario.trials)
}

/// Statistic samples for an explicit channel draw and trial count. The
/// channel draw is ignored under H0.
pub fn run_hypothesis_with(
    scenario: &Scenario,
    hypothesis: Hypothesis,
    channel_draw: u64,
    trials: usize,
) -> Result<Vec<StatisticSample>> {
    scenario.validate()?;
    if trials < 1 || trials as u64 >= MAX_TRIALS_PER_DRAW {
        return domain(format!("trials must be in 1..{MAX_TRIALS_PER_DRAW}"));
    }
    let (p0, p1) = effective_noise_powers(scenario.sigma2, scenario.mu_db)?;
    let s = scenario;
    Ok(match hypothesis {
        Hypothesis::H0 => {
            let model = CovarianceModel::spherical(s.k, 1.0)?;
            run_trials(&model, p0, s.n, trials, s.seed, Domain::H0, 0, &s.detectors, hypothesis)
        }
        Hypothesis::H1 => {
            let model = s.channel_model(channel_draw)?;
            let offset = channel_draw * MAX_TRIALS_PER_DRAW;
            run_trials(&model, p1, s.n, trials, s.seed, Domain::H1, offset, &s.detectors, hypothesis)
        }
    })
}

/// H1 statistic samples drawn from an explicit covariance model instead of
/// the scenario's channels; `snrs_db`, `sigma2` and `mu_db` are ignored.
pub fn run_model(model: &CovarianceModel, scenario: &Scenario) -> Result<Vec<StatisticSample>> {
    scenario.validate()?;
    if model.k() != scenario.k {
        return domain(format!("model has K = {}, scenario has K = {}", model.k(), scenario.k));
    }
    let s = scenario;
    Ok(run_trials(model, 1.0, s.n, s.trials, s.seed, Domain::H1, 0, &s.detectors, Hypothesis::H1))
}

/// Right-continuous empirical CDF of a sample; NaN values are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(values: &[f64]) -> Self {
        let mut sorted: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
        sorted.sort_by(f64::total_cmp);
        Self { sorted }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.sorted.is_empty() {
            return f64::NAN;
        }
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    /// Fraction strictly below `x`.
    pub fn below(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v < x) as f64 / self.sorted.len() as f64
    }

    /// Fraction strictly above `x`.
    pub fn above(&self, x: f64) -> f64 {
        1.0 - self.eval(x)
    }

    /// sup_x |F̂(x) − F(x)| for a continuous CDF `f`, evaluated on both sides
    /// of every jump.
    pub fn sup_distance<F: Fn(f64) -> f64 + Sync>(&self, f: F) -> f64 {
        let n = self.sorted.len() as f64;
        let s = &self.sorted;
        (0..s.len())
            .into_par_iter()
            .map(|i| {
                let fx = f(s[i]);
                // first index of the run of ties containing i
                let lo = if i > 0 && s[i - 1] == s[i] { s.partition_point(|&v| v < s[i]) } else { i };
                let hi = s.partition_point(|&v| v <= s[i]);
                (fx - lo as f64 / n).abs().max((hi as f64 / n - fx).abs())
            })
            .reduce(|| 0.0, f64::max)
    }
}

pub fn empirical_cdf(sample: &StatisticSample) -> EmpiricalCdf {
    EmpiricalCdf::new(&sample.values)
}

/// Mean of |F(x_i) − F̂(x_i)| over `n` equally spaced points of [lo, hi].
pub fn avg_cdf_vertical_difference<F, G>(f: F, f_hat: G, lo: f64, hi: f64, n: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    if n < 2 {
        return domain(format!("need at least 2 evaluation points, got {n}"));
    }
    if !(lo < hi) {
        return domain(format!("need lo < hi, got [{lo}, {hi}]"));
    }
    let step = (hi - lo) / (n - 1) as f64;
    let total: f64 = (0..n)
        .map(|i| {
            let x = if i == n - 1 { hi } else { lo + i as f64 * step };
            (f(x) - f_hat(x)).abs()
        })
        .sum();
    Ok(total / n as f64)
}

fn finite_range(a: &[f64], b: &[f64]) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in a.iter().chain(b) {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Fraction of `cdf`'s sample on the H1 side of `threshold`.
fn detect_fraction(cdf: &EmpiricalCdf, threshold: f64, dir: H1Direction) -> f64 {
    match dir {
        H1Direction::Small => cdf.below(threshold),
        H1Direction::Large => cdf.above(threshold),
    }
}

/// Threshold sweep over [`ROC_THRESHOLDS`] equally spaced points spanning the
/// pooled finite range of both samples. +∞ sorts above every threshold;
/// NaN never triggers a detection.
pub fn empirical_roc(h0: &[f64], h1: &[f64], detector: DetectorKind) -> Result<RocCurve> {
    if h0.is_empty() || h1.is_empty() {
        return domain("both samples must be nonempty");
    }
    let n0 = h0.len() as f64;
    let n1 = h1.len() as f64;
    let c0 = EmpiricalCdf::new(h0);
    let c1 = EmpiricalCdf::new(h1);
    // Rescale so dropped NaNs count as non-detections.
    let (f0, f1) = (c0.len() as f64 / n0, c1.len() as f64 / n1);
    let dir = detector.h1_direction();
    let mut points = match finite_range(h0, h1) {
        Some((lo, hi)) => {
            let step = (hi - lo) / (ROC_THRESHOLDS - 1) as f64;
            (0..ROC_THRESHOLDS)
                .map(|i| {
                    let t = if i == ROC_THRESHOLDS - 1 { hi } else { lo + i as f64 * step };
                    RocPoint { pfa: f0 * detect_fraction(&c0, t, dir), pd: f1 * detect_fraction(&c1, t, dir) }
                })
                .collect::<Vec<_>>()
        }
        None => vec![RocPoint { pfa: f0 * detect_fraction(&c0, 0.0, dir), pd: f1 * detect_fraction(&c1, 0.0, dir) }],
    };
    points.sort_by(|a, b| a.pfa.total_cmp(&b.pfa).then(a.pd.total_cmp(&b.pd)));
    Ok(RocCurve { detector, source: RocSource::Empirical, points })
}

/// Empirical threshold for false-alarm rate `pfa` from an H0 sample, and the
/// fraction of the H1 sample it detects.
///
/// The threshold is the H0 order statistic for which exactly ⌊pfa·n₀⌋ H0
/// values fall on the H1 side.
pub fn pd_at_pfa(h0: &[f64], h1: &[f64], dir: H1Direction, pfa: f64) -> Result<(f64, f64)> {
    let threshold = empirical_threshold(h0, dir, pfa)?;
    let c1 = EmpiricalCdf::new(h1);
    if c1.is_empty() {
        return domain("H1 sample is empty");
    }
    let pd = detect_fraction(&c1, threshold, dir) * c1.len() as f64 / h1.len() as f64;
    Ok((threshold, pd))
}

pub fn empirical_threshold(h0: &[f64], dir: H1Direction, pfa: f64) -> Result<f64> {
    if !(pfa > 0.0 && pfa < 1.0) {
        return domain(format!("pfa must lie in (0,1), got {pfa}"));
    }
    let c0 = EmpiricalCdf::new(h0);
    if c0.is_empty() {
        return domain("H0 sample is empty");
    }
    let s = c0.sorted();
    let m = ((pfa * s.len() as f64).floor() as usize).min(s.len() - 1);
    Ok(match dir {
        H1Direction::Small => s[m],
        H1Direction::Large => s[s.len() - 1 - m],
    })
}

/// Detection probability of one detector averaged over channel draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdEstimate {
    pub detector: DetectorKind,
    pub threshold: f64,
    /// Mean over channel draws.
    pub pd: f64,
    /// Standard error of the mean over channel draws.
    pub std_error: f64,
    pub per_draw: Vec<f64>,
}

fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Mean and standard error of the per-draw difference `a − b`.
pub fn paired_difference(a: &PdEstimate, b: &PdEstimate) -> (f64, f64) {
    let d: Vec<f64> = a.per_draw.iter().zip(&b.per_draw).map(|(x, y)| x - y).collect();
    mean_and_se(&d)
}

/// Pd at `pfa` for every detector of `scenario`, with thresholds from an
/// H0 sample of `h0_trials` and `scenario.trials` H1 trials per channel draw.
pub fn pd_over_channel_draws(
    scenario: &Scenario,
    pfa: f64,
    channel_draws: usize,
    h0_trials: usize,
) -> Result<Vec<PdEstimate>> {
    if channel_draws < 1 {
        return domain("channel_draws must be at least 1");
    }
    let h0 = run_hypothesis_with(scenario, Hypothesis::H0, 0, h0_trials)?;
    let thresholds = h0
        .iter()
        .map(|s| empirical_threshold(&s.values, s.detector.h1_direction(), pfa))
        .collect::<Result<Vec<_>>>()?;
    drop(h0);
    let mut per_draw = vec![Vec::with_capacity(channel_draws); scenario.detectors.len()];
    for d in 0..channel_draws as u64 {
        let h1 = run_hypothesis_with(scenario, Hypothesis::H1, d, scenario.trials)?;
        for (i, s) in h1.iter().enumerate() {
            let c1 = EmpiricalCdf::new(&s.values);
            let pd = detect_fraction(&c1, thresholds[i], s.detector.h1_direction()) * c1.len() as f64
                / s.values.len() as f64;
            per_draw[i].push(pd);
        }
    }
    Ok(scenario
        .detectors
        .iter()
        .zip(thresholds)
        .zip(per_draw)
        .map(|((&detector, threshold), per_draw)| {
            let (pd, std_error) = mean_and_se(&per_draw);
            PdEstimate { detector, threshold, pd, std_error, per_draw }
        })
        .collect())
}

/// Empirical ROC of every scenario detector on channel draw 0, plus the
/// analytic ST curve on `pfa_grid` when ST is requested.
pub fn roc_experiment(scenario: &Scenario, pfa_grid: &[f64]) -> Result<Vec<RocCurve>> {
    let h0 = run_hypothesis(scenario, Hypothesis::H0)?;
    let h1 = run_hypothesis(scenario, Hypothesis::H1)?;
    let mut curves =
        h0.iter().zip(&h1).map(|(a, b)| empirical_roc(&a.values, &b.values, a.detector)).collect::<Result<Vec<_>>>()?;
    if scenario.detectors.contains(&DetectorKind::St) {
        let model = scenario.channel_model(0)?;
        curves.push(crate::analytic::roc_analytic(&model, scenario.n, pfa_grid)?);
    }
    Ok(curves)
}

/// Settings for a Pd-versus-SNR table with `P = 2` users, `SNR₂ = SNR₁ + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdVsSnrSpec {
    pub snr1_grid_db: Vec<f64>,
    pub snr_offset_db: f64,
    pub pfa: f64,
    pub channel_draws: usize,
    pub h0_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdVsSnrRow {
    pub snr1_db: f64,
    pub estimates: Vec<PdEstimate>,
}

/// Pd at a fixed empirical false-alarm rate over a grid of SNR₁ values,
/// averaged over channel draws. The template's `snrs_db` is replaced by
/// `[SNR₁, SNR₁ + offset]`; draws and Gaussian streams are shared across the
/// grid so the rows differ only through the SNR.
pub fn pd_vs_snr(template: &Scenario, spec: &PdVsSnrSpec) -> Result<Vec<PdVsSnrRow>> {
    if spec.snr1_grid_db.is_empty() {
        return domain("SNR grid is empty");
    }
    spec.snr1_grid_db
        .iter()
        .map(|&snr1| {
            let mut s = template.clone();
            s.snrs_db = vec![snr1, snr1 + spec.snr_offset_db];
            let estimates = pd_over_channel_draws(&s, spec.pfa, spec.channel_draws, spec.h0_trials)?;
            Ok(PdVsSnrRow { snr1_db: snr1, estimates })
        })
        .collect()
}
