use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

/// Reward distribution attached to a state-action pair.
///
/// Every kind has an exact mean `mean`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RewardModel {
    /// `range * Bernoulli(mean / range)`, supported on `{0, range}`.
    BoundedBernoulliScaled {
        mean: f64,
        range: f64,
    },
    Gaussian {
        mean: f64,
        variance: f64,
    },
    /// `mean - 1/rate + Exp(rate)`.
    ExponentialShifted {
        mean: f64,
        rate: f64,
    },
    Degenerate {
        mean: f64,
    },
}

/// A `(sigma^2, alpha)` sub-exponential certificate for `R - mean`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubExpCertificate {
    pub sigma2: f64,
    pub alpha: f64,
}

impl RewardModel {
    pub fn mean(&self) -> f64 {
        match *self {
            RewardModel::BoundedBernoulliScaled { mean, .. }
            | RewardModel::Gaussian { mean, .. }
            | RewardModel::ExponentialShifted { mean, .. }
            | RewardModel::Degenerate { mean } => mean,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            RewardModel::BoundedBernoulliScaled { mean, range } => {
                if range == 0.0 {
                    0.0
                } else {
                    let p = mean / range;
                    range * range * p * (1.0 - p)
                }
            }
            RewardModel::Gaussian { variance, .. } => variance,
            RewardModel::ExponentialShifted { rate, .. } => 1.0 / (rate * rate),
            RewardModel::Degenerate { .. } => 0.0,
        }
    }

    /// Bounded kinds are supported on a compact interval inside `[0, range]`.
    pub fn is_bounded(&self) -> bool {
        matches!(
            self,
            RewardModel::BoundedBernoulliScaled { .. } | RewardModel::Degenerate { .. }
        )
    }

    /// Sub-exponential certificate of the centered reward.
    ///
    /// Bounded kinds use `(2 Var, range)`, which dominates the bounded-variable
    /// certificate `(2(e-2) Var, range)`. Centered `Exp(rate)` is
    /// `(2/rate^2, 2/rate)`-sub-exponential.
    pub fn certificate(&self) -> SubExpCertificate {
        match *self {
            RewardModel::BoundedBernoulliScaled { range, .. } => SubExpCertificate {
                sigma2: 2.0 * self.variance(),
                alpha: range,
            },
            RewardModel::Gaussian { variance, .. } => SubExpCertificate {
                sigma2: variance,
                alpha: 0.0,
            },
            RewardModel::ExponentialShifted { rate, .. } => SubExpCertificate {
                sigma2: 2.0 / (rate * rate),
                alpha: 2.0 / rate,
            },
            RewardModel::Degenerate { .. } => SubExpCertificate {
                sigma2: 0.0,
                alpha: 0.0,
            },
        }
    }

    /// Sub-Gaussian variance proxy of the centered reward, if one exists.
    pub fn sub_gaussian_proxy(&self) -> Option<f64> {
        match *self {
            RewardModel::BoundedBernoulliScaled { range, .. } => Some(range * range / 4.0),
            RewardModel::Gaussian { variance, .. } => Some(variance),
            RewardModel::ExponentialShifted { .. } => None,
            RewardModel::Degenerate { .. } => Some(0.0),
        }
    }

    pub fn validate(&self, v_max: f64) -> Result<(), String> {
        let finite = |x: f64, what: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(format!("{what} must be finite, got {x}"))
            }
        };
        finite(self.mean(), "mean")?;
        match *self {
            RewardModel::BoundedBernoulliScaled { mean, range } => {
                finite(range, "range")?;
                if range < 0.0 || range > v_max {
                    return Err(format!("bounded reward range {range} outside [0, v_max={v_max}]"));
                }
                if mean < 0.0 || mean > range {
                    return Err(format!("bounded reward mean {mean} outside [0, {range}]"));
                }
            }
            RewardModel::Gaussian { variance, .. } => {
                finite(variance, "variance")?;
                if variance < 0.0 {
                    return Err(format!("negative variance {variance}"));
                }
            }
            RewardModel::ExponentialShifted { rate, .. } => {
                finite(rate, "rate")?;
                if rate <= 0.0 {
                    return Err(format!("exponential rate must be positive, got {rate}"));
                }
            }
            RewardModel::Degenerate { .. } => {}
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            RewardModel::BoundedBernoulliScaled { mean, range } => {
                if range == 0.0 {
                    return 0.0;
                }
                let u: f64 = rng.random();
                if u < mean / range {
                    range
                } else {
                    0.0
                }
            }
            RewardModel::Gaussian { mean, variance } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + variance.sqrt() * z
            }
            RewardModel::ExponentialShifted { mean, rate } => {
                let e: f64 = Exp::new(rate).expect("validated rate").sample(rng);
                mean - 1.0 / rate + e
            }
            RewardModel::Degenerate { mean } => mean,
        }
    }
}
