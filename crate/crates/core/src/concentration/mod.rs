//! Concentration thresholds for martingale sums and Monte-Carlo certification
//! of their violation rates.

use thiserror::Error;

mod certificate;
mod montecarlo;
mod thresholds;

pub use certificate::{bounded_subexp_cert, g};
pub use montecarlo::{certification_matrix, certify, violation_tolerance, CertConfig, CertRow, Generator, Lemma};
pub use thresholds::{clipped_timeuniform_threshold, hoeffding_threshold, peeling_threshold, ville_threshold};

#[derive(Debug, Error, PartialEq)]
pub enum ConcentrationError {
    #[error("delta must lie in (0, 1], got {0}")]
    InvalidDelta(f64),
    #[error("lambda = {lambda} outside (0, 1/alpha] for alpha = {alpha}")]
    LambdaOutOfRange { lambda: f64, alpha: f64 },
    #[error("clip level must be positive, got {0}")]
    NonPositiveClip(f64),
    #[error("eta must lie in (0, e), got {0}")]
    EtaOutOfRange(f64),
    #[error("{0} increments are not sub-Gaussian")]
    NotSubGaussian(&'static str),
}
