use std::fmt;

use serde::{Deserialize, Serialize};

use crate::detectors::DetectorKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    /// No primary user: Σ = σ²I.
    H0,
    /// At least one primary user transmitting.
    H1,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hypothesis::H0 => "H0",
            Hypothesis::H1 => "H1",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RocSource {
    Analytic,
    Empirical,
}

impl RocSource {
    pub fn name(self) -> &'static str {
        match self {
            RocSource::Analytic => "analytic",
            RocSource::Empirical => "empirical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub pfa: f64,
    pub pd: f64,
}

/// Detection probability against false-alarm probability, sorted by pfa.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub detector: DetectorKind,
    pub source: RocSource,
    pub points: Vec<RocPoint>,
}

impl RocCurve {
    /// Pd at `pfa` by linear interpolation between neighbouring points.
    ///
    /// Among points sharing the same pfa the largest pd is used.
    pub fn pd_at(&self, pfa: f64) -> f64 {
        let pts = &self.points;
        if pts.is_empty() {
            return f64::NAN;
        }
        let idx = pts.partition_point(|p| p.pfa <= pfa);
        if idx == 0 {
            return pts[0].pd;
        }
        let lo = pts[idx - 1];
        if lo.pfa == pfa || idx == pts.len() {
            // Largest pd among the run of equal pfa ending at idx-1.
            return pts[..idx].iter().rev().take_while(|p| p.pfa == lo.pfa).map(|p| p.pd).fold(lo.pd, f64::max);
        }
        let hi = pts[idx];
        lo.pd + (hi.pd - lo.pd) * (pfa - lo.pfa) / (hi.pfa - lo.pfa)
    }
}
