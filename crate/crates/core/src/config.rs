//! Experiment configuration records for the CLI, stored as JSON.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::simulate::{PdVsSnrSpec, Scenario};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    #[default]
    Linear,
    Log,
}

/// `points` values from `start` to `stop` inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: GridScale,
}

impl GridSpec {
    pub fn linear(start: f64, stop: f64, points: usize) -> Self {
        Self { start, stop, points, scale: GridScale::Linear }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            return domain("grid needs at least one point");
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return domain("grid bounds must be finite");
        }
        let (a, b) = match self.scale {
            GridScale::Linear => (self.start, self.stop),
            GridScale::Log => {
                if !(self.start > 0.0 && self.stop > 0.0) {
                    return domain("log grid bounds must be positive");
                }
                (self.start.ln(), self.stop.ln())
            }
        };
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        let step = (b - a) / (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| {
                let v = if i == self.points - 1 { b } else { a + i as f64 * step };
                match self.scale {
                    GridScale::Linear => v,
                    GridScale::Log => {
                        if i == self.points - 1 {
                            self.stop
                        } else {
                            v.exp()
                        }
                    }
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    /// False-alarm grid for analytic ROC curves.
    pub pfa_grid: GridSpec,
    /// Evaluation points for CDF tables.
    pub y_grid: GridSpec,
    pub pd_table: PdVsSnrSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::new(4, 200, vec![-1.0, -3.0, -10.0]),
            out: None,
            format: OutputFormat::Csv,
            pfa_grid: GridSpec::linear(0.001, 0.999, 999),
            y_grid: GridSpec::linear(0.0, 1.0, 1001),
            pd_table: PdVsSnrSpec {
                snr1_grid_db: vec![-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
                snr_offset_db: -2.0,
                pfa: 1e-2,
                channel_draws: 200,
                h0_trials: 1_000_000,
            },
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).or_else(|e| domain(format!("invalid config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is always serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ChannelMode;
    use crate::DetectorKind;

    #[test]
    fn json_round_trip() {
        let mut c = ExperimentConfig::default();
        c.scenario.snrs_db = vec![-1.0 / 3.0, 0.1 + 0.2, -22.0];
        c.scenario.mu_db = 0.5;
        c.scenario.seed = u64::MAX;
        c.scenario.detectors = vec![DetectorKind::John, DetectorKind::St];
        c.scenario.channel_mode = ChannelMode::Orthonormal;
        c.out = Some("out/roc.csv".into());
        c.format = OutputFormat::Json;
        c.pfa_grid = GridSpec { start: 1e-6, stop: 0.5, points: 40, scale: GridScale::Log };
        let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_json(), c.to_json());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = ExperimentConfig::default().to_json().replace("\"format\"", "\"fromat\"");
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn grids() {
        let g = GridSpec::linear(0.0, 1.0, 5).values().unwrap();
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = GridSpec { start: 1e-4, stop: 1.0, points: 5, scale: GridScale::Log }.values().unwrap();
        assert!((g[1] - 1e-3).abs() < 1e-15 && g[4] == 1.0);
        assert!(GridSpec::linear(0.0, 1.0, 0).values().is_err());
        assert_eq!(GridSpec::linear(0.3, 1.0, 1).values().unwrap(), vec![0.3]);
    }
}
