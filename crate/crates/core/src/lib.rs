//! Spherical-test spectrum sensing: closed-form false-alarm and detection
//! probabilities for the sphericity detector, competing eigenvalue detectors,
//! and a reproducible Monte-Carlo engine to check them.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod analytic;
pub mod config;
pub mod detectors;
pub mod error;
pub mod linalg;
pub mod output;
pub mod rng;
pub mod simulate;
pub mod special;
pub mod types;

pub use detectors::DetectorKind;
pub use error::{Error, Result};
pub use types::{Hypothesis, RocCurve, RocPoint, RocSource};
