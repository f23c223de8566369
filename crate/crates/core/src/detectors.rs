//! Eigenvalue-based test statistics.
//!
//! Every statistic consumes the eigenvalues of the sample covariance `R`, so a
//! single eigendecomposition per trial serves all detectors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Side of the threshold on which a detector declares H1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum H1Direction {
    Small,
    Large,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DetectorKind {
    /// Spherical test: det R / (tr R / K)^K.
    St,
    /// Eigenvalue ratio λ₁/λ_K.
    Er,
    /// John's test Σλ²/(Σλ)².
    John,
    /// Largest eigenvalue.
    Le,
    /// Largest eigenvalue over the trace.
    Sle,
    /// Energy ‖X‖²_F = tr R.
    Ed,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 6] =
        [DetectorKind::St, DetectorKind::Er, DetectorKind::John, DetectorKind::Le, DetectorKind::Sle, DetectorKind::Ed];

    pub fn h1_direction(self) -> H1Direction {
        match self {
            DetectorKind::St => H1Direction::Small,
            _ => H1Direction::Large,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::St => "ST",
            DetectorKind::Er => "ER",
            DetectorKind::John => "JOHN",
            DetectorKind::Le => "LE",
            DetectorKind::Sle => "SLE",
            DetectorKind::Ed => "ED",
        }
    }

    /// Statistics unchanged when every eigenvalue is multiplied by c > 0.
    pub fn is_scale_invariant(self) -> bool {
        !matches!(self, DetectorKind::Le | DetectorKind::Ed)
    }

    /// Evaluate on eigenvalues sorted descending.
    ///
    /// Domain errors (zero trace) become NaN so a Monte-Carlo batch never
    /// aborts; ER's rank-deficient case is +∞.
    pub fn evaluate(self, eigs: &[f64]) -> f64 {
        let r = match self {
            DetectorKind::St => st_statistic(eigs),
            DetectorKind::Er => er_statistic(eigs),
            DetectorKind::John => john_statistic(eigs),
            DetectorKind::Le => le_statistic(eigs),
            DetectorKind::Sle => sle_statistic(eigs),
            DetectorKind::Ed => Ok(ed_statistic(eigs)),
        };
        r.unwrap_or(f64::NAN)
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ST" => Ok(DetectorKind::St),
            "ER" => Ok(DetectorKind::Er),
            "JOHN" | "J" => Ok(DetectorKind::John),
            "LE" => Ok(DetectorKind::Le),
            "SLE" => Ok(DetectorKind::Sle),
            "ED" => Ok(DetectorKind::Ed),
            other => domain(format!("unknown detector '{other}' (expected ST, ER, JOHN, LE, SLE or ED)")),
        }
    }
}

fn max_of(eigs: &[f64]) -> f64 {
    eigs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(eigs: &[f64]) -> f64 {
    eigs.iter().copied().fold(f64::INFINITY, f64::min)
}

fn positive_trace(eigs: &[f64]) -> Result<f64> {
    let tr: f64 = eigs.iter().sum();
    if !(tr > 0.0) {
        return domain("statistic undefined for zero trace");
    }
    Ok(tr)
}

/// `Π λ_i / (mean λ)^K`, in [0, 1].
pub fn st_statistic(eigs: &[f64]) -> Result<f64> {
    if eigs.len() < 2 {
        return domain("ST statistic needs K >= 2");
    }
    let tr = positive_trace(eigs)?;
    let k = eigs.len() as f64;
    let floor = 1e-300 * max_of(eigs);
    if eigs.iter().any(|&l| l < floor) {
        return Ok(0.0);
    }
    let mean = tr / k;
    let log_ratio: f64 = eigs.iter().map(|&l| (l / mean).ln()).sum();
    Ok(log_ratio.exp().min(1.0))
}

/// `λ₁/λ_K`; +∞ when λ_K ≤ 1e-300.
pub fn er_statistic(eigs: &[f64]) -> Result<f64> {
    if eigs.is_empty() {
        return domain("ER statistic needs at least one eigenvalue");
    }
    let lo = min_of(eigs);
    if lo <= 1e-300 {
        return Ok(f64::INFINITY);
    }
    Ok(max_of(eigs) / lo)
}

/// `Σλ²/(Σλ)²`, in [1/K, 1].
pub fn john_statistic(eigs: &[f64]) -> Result<f64> {
    let tr = positive_trace(eigs)?;
    Ok(eigs.iter().map(|&l| (l / tr) * (l / tr)).sum())
}

/// `λ₁`.
pub fn le_statistic(eigs: &[f64]) -> Result<f64> {
    if eigs.is_empty() {
        return domain("LE statistic needs at least one eigenvalue");
    }
    Ok(max_of(eigs))
}

/// `λ₁ / tr R`, in [1/K, 1].
pub fn sle_statistic(eigs: &[f64]) -> Result<f64> {
    let tr = positive_trace(eigs)?;
    Ok(max_of(eigs) / tr)
}

/// `tr R = ‖X‖²_F`.
pub fn ed_statistic(eigs: &[f64]) -> f64 {
    eigs.iter().sum()
}
