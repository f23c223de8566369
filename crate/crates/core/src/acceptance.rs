//! Acceptance suite shared by `stsense validate` and the `acceptance` test target.
//!
//! Each criterion returns a [`CriterionResult`]; runtime is measured and
//! reported against its budget but not enforced, since it depends on the host.

use std::fmt;
use std::time::{Duration, Instant};

use crate::analytic::{
    h0_beta, h0_cdf_beta, h0_cdf_exact_k2, h0_moment, h1_beta, h1_cdf_exact_k2, h1_moment, pfa, threshold_for_pfa,
};
use crate::detectors::DetectorKind;
use crate::error::Result;
use crate::linalg::{ChannelMode, CovarianceModel};
use crate::simulate::{
    avg_cdf_vertical_difference, paired_difference, pd_over_channel_draws, pd_vs_snr, run_hypothesis_with,
    EmpiricalCdf, PdEstimate, PdVsSnrSpec, Scenario,
};
use crate::types::Hypothesis;

const SEED: u64 = 0x5eed_2015;

pub const CRITERIA: [(u8, &str); 11] = [
    (1, "null Beta parameters for K=4"),
    (2, "two-sensor null fit is exact"),
    (3, "null moment oracles"),
    (4, "alternative collapses to null for spherical covariance"),
    (5, "exact two-sensor alternative CDF"),
    (6, "null Beta fit against simulation"),
    (7, "detection probability approximation against simulation"),
    (8, "ROC orderings at pfa 0.1"),
    (9, "noise-uncertainty behaviour"),
    (10, "Pd versus SNR table"),
    (11, "threshold and pfa round trips"),
];

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] criterion {:>2}: {} ({:.1}s, budget {:.0}s) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs_f64(),
            self.detail
        )
    }
}

/// Runs criteria, caching simulation results shared between them.
#[derive(Default)]
pub struct Suite {
    three_user_mu0: Option<Vec<PdEstimate>>,
}

fn budget(id: u8) -> Duration {
    Duration::from_secs(match id {
        1 | 2 | 4 | 11 => 1,
        3 => 30,
        5 => 120,
        6 | 7 | 9 => 300,
        8 => 900,
        _ => 600,
    })
}

fn title(id: u8) -> &'static str {
    CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("unknown")
}

struct Check {
    ok: bool,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self { ok: true, notes: Vec::new() }
    }

    fn require(&mut self, cond: bool, note: String) {
        if !cond {
            self.ok = false;
            self.notes.push(format!("FAILED {note}"));
        } else {
            self.notes.push(note);
        }
    }

    fn finish(self) -> (bool, String) {
        (self.ok, self.notes.join("; "))
    }
}

impl Suite {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn run(&mut self, id: u8) -> CriterionResult {
        let start = Instant::now();
        let outcome = match id {
            1 => criterion_1(),
            2 => criterion_2(),
            3 => criterion_3(),
            4 => criterion_4(),
            5 => criterion_5(),
            6 => criterion_6(),
            7 => criterion_7(),
            8 => self.criterion_8(),
            9 => self.criterion_9(),
            10 => criterion_10(),
            11 => criterion_11(),
            _ => Ok((false, format!("no criterion {id}"))),
        };
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        CriterionResult { id, title: title(id), passed, detail, elapsed: start.elapsed(), budget: budget(id) }
    }

    /// Run every criterion in order, handing each result to `report` as it completes.
    pub fn run_all(&mut self, mut report: impl FnMut(&CriterionResult)) -> Vec<CriterionResult> {
        CRITERIA
            .iter()
            .map(|&(id, _)| {
                let r = self.run(id);
                report(&r);
                r
            })
            .collect()
    }

    fn three_user(&mut self) -> Result<Vec<PdEstimate>> {
        if self.three_user_mu0.is_none() {
            self.three_user_mu0 =
                Some(pd_over_channel_draws(&three_user_scenario(0.0), 0.1, ORDERING_DRAWS, ORDERING_TRIALS)?);
        }
        Ok(self.three_user_mu0.clone().unwrap_or_default())
    }

    fn criterion_8(&mut self) -> Result<(bool, String)> {
        let mut c = Check::new();
        let one = Scenario {
            trials: ORDERING_TRIALS,
            seed: SEED ^ 8,
            detectors: vec![DetectorKind::Sle, DetectorKind::St, DetectorKind::Er],
            ..Scenario::new(4, 400, vec![-3.0])
        };
        let est = pd_over_channel_draws(&one, 0.1, ORDERING_DRAWS, ORDERING_TRIALS)?;
        ordering(&mut c, "(a)", &est, DetectorKind::Sle, DetectorKind::St);
        ordering(&mut c, "(a)", &est, DetectorKind::St, DetectorKind::Er);
        let est = self.three_user()?;
        ordering(&mut c, "(b)", &est, DetectorKind::St, DetectorKind::Sle);
        ordering(&mut c, "(b)", &est, DetectorKind::St, DetectorKind::Er);
        let six = Scenario {
            trials: ORDERING_TRIALS,
            seed: SEED ^ 8,
            detectors: vec![DetectorKind::St, DetectorKind::John],
            ..Scenario::new(4, 100, vec![0.0, -1.0, -3.0, -8.0, -10.0, -22.0])
        };
        let est = pd_over_channel_draws(&six, 0.1, ORDERING_DRAWS, ORDERING_TRIALS)?;
        ordering(&mut c, "(c)", &est, DetectorKind::St, DetectorKind::John);
        Ok(c.finish())
    }

    fn criterion_9(&mut self) -> Result<(bool, String)> {
        let mut c = Check::new();
        // sample invariance of the scale-free statistics, both hypotheses
        let base = Scenario {
            trials: INVARIANCE_TRIALS,
            detectors: vec![DetectorKind::St, DetectorKind::Sle, DetectorKind::Er, DetectorKind::John],
            ..three_user_scenario(0.0)
        };
        for hyp in [Hypothesis::H0, Hypothesis::H1] {
            let reference = run_hypothesis_with(&base, hyp, 0, base.trials)?;
            for mu in [0.5, 1.0] {
                let other = run_hypothesis_with(&Scenario { mu_db: mu, ..base.clone() }, hyp, 0, base.trials)?;
                for (a, b) in reference.iter().zip(&other) {
                    let worst = a
                        .values
                        .iter()
                        .zip(&b.values)
                        .map(|(x, y)| if x == y { 0.0 } else { ((x - y) / x).abs() })
                        .fold(0.0, f64::max);
                    if worst > 1e-12 {
                        c.require(false, format!("{} {hyp} mu={mu}: relative change {worst:.2e}", a.detector));
                    }
                }
            }
        }
        c.require(
            c.ok,
            format!(
                "ST/SLE/ER/JOHN samples unchanged by mu in {{0.5, 1}} dB ({INVARIANCE_TRIALS} trials per hypothesis)"
            ),
        );
        // scale-dependent detectors lose power
        let mu0 = self.three_user()?;
        let mut curves: Vec<Vec<f64>> = Vec::new();
        let scale_dependent = [DetectorKind::Ed, DetectorKind::Le];
        curves.push(scale_dependent.iter().map(|&d| find(&mu0, d).pd).collect());
        for mu in [0.5, 1.0] {
            let s = Scenario { detectors: scale_dependent.to_vec(), ..three_user_scenario(mu) };
            let est = pd_over_channel_draws(&s, 0.1, ORDERING_DRAWS, ORDERING_TRIALS)?;
            curves.push(scale_dependent.iter().map(|&d| find(&est, d).pd).collect());
        }
        for (i, d) in scale_dependent.iter().enumerate() {
            let pds: Vec<f64> = curves.iter().map(|c| c[i]).collect();
            let decreasing = pds.windows(2).all(|w| w[1] < w[0]);
            c.require(decreasing, format!("{d} Pd at mu=0/0.5/1 dB: {:.5}/{:.5}/{:.5}", pds[0], pds[1], pds[2]));
        }
        Ok(c.finish())
    }
}

const ORDERING_DRAWS: usize = 20;
const ORDERING_TRIALS: usize = 100_000;
const INVARIANCE_TRIALS: usize = 20_000;

fn three_user_scenario(mu_db: f64) -> Scenario {
    Scenario { trials: ORDERING_TRIALS, seed: SEED ^ 89, mu_db, ..Scenario::new(4, 200, vec![-1.0, -3.0, -10.0]) }
}

fn find(est: &[PdEstimate], d: DetectorKind) -> &PdEstimate {
    est.iter().find(|e| e.detector == d).expect("detector present in estimate")
}

/// Pd(a) >= Pd(b) within two standard errors of the paired per-draw difference.
fn ordering(c: &mut Check, label: &str, est: &[PdEstimate], a: DetectorKind, b: DetectorKind) {
    let (ea, eb) = (find(est, a), find(est, b));
    let (diff, se) = paired_difference(ea, eb);
    c.require(
        diff >= -2.0 * se,
        format!("{label} Pd({a})={:.4} >= Pd({b})={:.4} (diff {diff:+.4}, se {se:.4})", ea.pd, eb.pd),
    );
}

fn criterion_1() -> Result<(bool, String)> {
    let mut c = Check::new();
    for (n, want) in [(400, 395.4), (200, 195.4), (100, 95.5)] {
        let p = h0_beta(4, n)?;
        c.require((p.alpha - want).abs() <= 0.05, format!("N={n}: alpha={:.4} (expected {want})", p.alpha));
    }
    Ok(c.finish())
}

fn criterion_2() -> Result<(bool, String)> {
    let mut c = Check::new();
    for n in [4usize, 10, 50, 400] {
        let p = h0_beta(2, n)?;
        let mut worst = 0.0_f64;
        for i in 0..1000 {
            let y = i as f64 / 999.0;
            worst = worst.max((h0_cdf_beta(y, 2, n)? - h0_cdf_exact_k2(y, n)?).abs());
        }
        let params_ok = (p.alpha - (n as f64 - 1.0)).abs() <= 1e-9 && (p.beta - 1.5).abs() <= 1e-9;
        c.require(
            params_ok && worst < 1e-12,
            format!("N={n}: ({:.10}, {:.10}), sup diff {worst:.1e}", p.alpha, p.beta),
        );
    }
    Ok(c.finish())
}

fn criterion_3() -> Result<(bool, String)> {
    let mut c = Check::new();
    let m1 = h0_moment(2, 4, 1)?;
    let m2 = h0_moment(2, 4, 2)?;
    c.require(
        (m1 - 2.0 / 3.0).abs() <= 1e-12 && (m2 - 16.0 / 33.0).abs() <= 1e-12,
        format!("M1={m1:.15}, M2={m2:.15}"),
    );
    let s = Scenario {
        trials: 1_000_000,
        seed: SEED ^ 3,
        detectors: vec![DetectorKind::St],
        ..Scenario::new(2, 4, vec![])
    };
    let v = &run_hypothesis_with(&s, Hypothesis::H0, 0, s.trials)?[0].values;
    for (order, exact) in [(1, m1), (2, m2)] {
        let xs: Vec<f64> = v.iter().map(|x| x.powi(order)).collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        c.require(
            (mean - exact).abs() <= 3.0 * se,
            format!("sample M{order}={mean:.6} vs {exact:.6} ({:.2} se)", (mean - exact).abs() / se),
        );
    }
    Ok(c.finish())
}

fn criterion_4() -> Result<(bool, String)> {
    let mut c = Check::new();
    for (k, n, s2) in [(2usize, 4usize, 1.0), (4, 20, 2.5), (4, 400, 0.3), (8, 50, 1.0)] {
        let model = CovarianceModel::spherical(k, s2)?;
        let mut worst = 0.0_f64;
        for order in 1..=4 {
            let a = h1_moment(&model, n, order)?;
            let b = h0_moment(k, n, order)?;
            worst = worst.max((a - b).abs());
        }
        let p0 = h0_beta(k, n)?;
        let p1 = h1_beta(&model, n)?;
        let same = (p0.alpha - p1.alpha).abs() <= 1e-9 * p0.alpha && (p0.beta - p1.beta).abs() <= 1e-9 * p0.beta;
        c.require(worst <= 1e-12 && same, format!("K={k} N={n} sigma2={s2}: max |N_n - M_n| = {worst:.1e}"));
    }
    Ok(c.finish())
}

fn criterion_5() -> Result<(bool, String)> {
    let mut c = Check::new();
    let model = CovarianceModel::diagonal(&[2.0, 1.0])?;
    let s = Scenario {
        trials: 1_000_000,
        seed: SEED ^ 5,
        detectors: vec![DetectorKind::St],
        ..Scenario::new(2, 10, vec![])
    };
    let v = &crate::simulate::run_model(&model, &s)?[0].values;
    let cdf = EmpiricalCdf::new(v);
    let d = cdf.sup_distance(|y| h1_cdf_exact_k2(y, 2.0, 1.0, 10).unwrap_or(f64::NAN));
    c.require(d <= 3e-3 && !d.is_nan(), format!("sup distance {d:.2e} over {} trials", v.len()));
    Ok(c.finish())
}

fn criterion_6() -> Result<(bool, String)> {
    let mut c = Check::new();
    for (k, n) in [(4usize, 20usize), (4, 50), (8, 50)] {
        let s = Scenario {
            trials: 1_000_000,
            seed: SEED ^ 6,
            detectors: vec![DetectorKind::St],
            ..Scenario::new(k, n, vec![])
        };
        let v = &run_hypothesis_with(&s, Hypothesis::H0, 0, s.trials)?[0].values;
        let emp = EmpiricalCdf::new(v);
        let fit = h0_beta(k, n)?;
        let d = avg_cdf_vertical_difference(|y| fit.cdf(y).unwrap_or(f64::NAN), |y| emp.eval(y), 0.0, 1.0, 10_000)?;
        c.require(d <= 1e-3, format!("(K,N)=({k},{n}): average vertical difference {d:.2e}"));
    }
    Ok(c.finish())
}

fn criterion_7() -> Result<(bool, String)> {
    let mut c = Check::new();
    for (k, n) in [(4usize, 100usize), (4, 200)] {
        let s = Scenario {
            trials: 100_000,
            seed: SEED ^ 7,
            detectors: vec![DetectorKind::St],
            ..Scenario::new(k, n, vec![-1.0, -3.0, -10.0])
        };
        let mut worst = 0.0_f64;
        for draw in 0..5u64 {
            let model = s.channel_model(draw)?;
            let alt = h1_beta(&model, n)?;
            let v = &run_hypothesis_with(&s, Hypothesis::H1, draw, s.trials)?[0].values;
            let emp = EmpiricalCdf::new(v);
            for i in 0..10 {
                let zeta = alt.quantile(0.05 + 0.1 * i as f64)?;
                let analytic = crate::analytic::pd(zeta, &model, n)?;
                worst = worst.max((analytic - emp.below(zeta)).abs());
            }
        }
        c.require(
            worst <= 0.01,
            format!("(K,N)=({k},{n}): max |Pd analytic - simulated| = {worst:.4} over 5 channels x 10 thresholds"),
        );
    }
    Ok(c.finish())
}

/// Published Table I values at SNR₁ = −1, 0, 1, 2, 3 dB: (SNR₁, ST, John).
const PD_TABLE: [(f64, f64, f64); 5] = [
    (-1.0, 0.3628, 0.3721),
    (0.0, 0.5891, 0.5901),
    (1.0, 0.8105, 0.8094),
    (2.0, 0.9482, 0.9458),
    (3.0, 0.9935, 0.9929),
];

fn criterion_10() -> Result<(bool, String)> {
    let mut c = Check::new();
    let template = Scenario {
        trials: 10_000,
        seed: SEED ^ 10,
        detectors: vec![DetectorKind::St, DetectorKind::John],
        channel_mode: ChannelMode::Orthonormal,
        ..Scenario::new(4, 50, vec![])
    };
    let spec = PdVsSnrSpec {
        snr1_grid_db: PD_TABLE.iter().map(|r| r.0).collect(),
        snr_offset_db: -2.0,
        pfa: 1e-2,
        channel_draws: 200,
        h0_trials: 2_000_000,
    };
    let rows = pd_vs_snr(&template, &spec)?;
    let mut last = 0.0;
    for (row, &(snr, st_ref, john_ref)) in rows.iter().zip(&PD_TABLE) {
        let st = find(&row.estimates, DetectorKind::St);
        let john = find(&row.estimates, DetectorKind::John);
        let (diff, se) = paired_difference(st, john);
        c.require(
            (st.pd - st_ref).abs() <= 0.1,
            format!("SNR1={snr} dB: ST {:.4} (table {st_ref}), JOHN {:.4} (table {john_ref})", st.pd, john.pd),
        );
        c.require(st.pd >= last, format!("SNR1={snr} dB: ST monotone"));
        last = st.pd;
        let want_st_better = st_ref > john_ref;
        if snr <= -1.0 || snr >= 1.0 {
            c.require(
                (diff > 0.0) == want_st_better,
                format!("SNR1={snr} dB: ST-JOHN {diff:+.4} (se {se:.4}), sign as in table"),
            );
        }
    }
    Ok(c.finish())
}

fn criterion_11() -> Result<(bool, String)> {
    let mut c = Check::new();
    let mut worst = 0.0_f64;
    for (k, n) in [(2usize, 10usize), (4, 100), (8, 50)] {
        for p in [1e-6, 1e-4, 1e-2, 0.5, 0.99] {
            let z = threshold_for_pfa(p, k, n)?;
            worst = worst.max((pfa(z, k, n)? - p).abs());
        }
    }
    c.require(worst <= 1e-10, format!("max |pfa(threshold(p)) - p| = {worst:.1e}"));
    Ok(c.finish())
}
