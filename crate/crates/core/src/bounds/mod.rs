//! Closed-form regret bounds and the auxiliary sequences they depend on.

use thiserror::Error;

use crate::mdp::VarianceProxyTablesOf;
use crate::scalar::ExtReal;

pub mod bandit;
pub mod curve;
pub mod kappa;
pub mod lambda;
pub mod logs;
pub mod named;
pub mod rl;
pub mod ucb;

pub use bandit::{thm_c1, thm_c1_expected, thm_c1_special, thm_c2, C1Form};
pub use curve::{
    default_grid, expected_bound_via_integral, log_grid, BoundCurve, BoundPoint, Integral, DEFAULT_GRID_MIN,
    DEFAULT_GRID_POINTS,
};
pub use kappa::{kappa, kappa_gap, kappa_gap_reference, kappa_reference, Kappa};
pub use lambda::{lambda_iota, LambdaIota, LambdaIotaBuilder};
pub use logs::{LogFactors, LogForm};
pub use named::{cor1, cor2, cor3_instance, cor3_worst_case, Cor2Params, Cor3Params};
pub use rl::{thm_b1, thm_e1, GapInput, GapVariant, RlInput};
pub use ucb::{tight_ucb, DeltaRule};

#[derive(Debug, Error, PartialEq)]
pub enum BoundError {
    #[error("no admissible lambda for c = {c} and l1 = {ell}: c is below the threshold")]
    NoRoot { c: f64, ell: f64 },
    #[error("c1 schedule decreases at k = {k}")]
    NonMonotoneSchedule { k: u64 },
    #[error("delta must lie in (0, 1], got {0}")]
    InvalidDelta(f64),
    #[error("gap must be positive, got {0}")]
    NonPositiveGap(f64),
    #[error("effective gap at (s = {s}, a = {a}) is not positive: {value}")]
    NonPositiveEffectiveGap { s: usize, a: usize, value: f64 },
    #[error("parameter constraint violated: {0}")]
    ParameterConstraint(String),
    #[error("quadrature error estimate {estimate} exceeds 1% of {value}")]
    GridTooCoarse { estimate: f64, value: f64 },
    #[error("schedule is only tabulated up to k = {k_max}, requested {k}")]
    BeyondHorizon { k: u64, k_max: u64 },
}

pub(crate) fn check_delta(delta: f64) -> Result<(), BoundError> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(BoundError::InvalidDelta(delta))
    }
}

/// Bonus coefficient sequences `c1,k` and `c2,k`, indexed from `k = 1`.
pub trait CoefficientSequence {
    fn c1_at(&self, k: u64) -> ExtReal;
    fn c2_at(&self, k: u64) -> ExtReal;
}

/// Coefficient sequences given by two closures.
pub struct FnSequence<F, G>(pub F, pub G);

impl<F: Fn(u64) -> ExtReal, G: Fn(u64) -> ExtReal> CoefficientSequence for FnSequence<F, G> {
    fn c1_at(&self, k: u64) -> ExtReal {
        (self.0)(k)
    }

    fn c2_at(&self, k: u64) -> ExtReal {
        (self.1)(k)
    }
}

/// Instance constants entering the RL bounds.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ProxyConstants {
    pub v_max: f64,
    pub w_star: f64,
    pub w_diff: f64,
    pub v_alpha: f64,
    pub sigma_max: f64,
}

impl ProxyConstants {
    pub fn from_tables(v_max: f64, t: &VarianceProxyTablesOf<f64>) -> Self {
        ProxyConstants {
            v_max,
            w_star: t.w_star,
            w_diff: t.w_diff_star,
            v_alpha: t.v_alpha,
            sigma_max: t.sigma_max,
        }
    }
}
