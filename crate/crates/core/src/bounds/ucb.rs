use serde::{Deserialize, Serialize};

use super::BoundError;

/// Tight time-uniform UCB radius numerator
/// `sigma sqrt(2 (1 + 1/log(1+t)) (log(1/delta) + log A + 6 log log(1+t) + 8))`.
pub fn tight_ucb(t: u64, delta: f64, sigma: f64, actions: usize) -> f64 {
    let lt = (1.0 + t as f64).ln();
    let inner = (1.0 / delta).ln() + (actions as f64).ln() + 6.0 * lt.ln() + 8.0;
    sigma * (2.0 * (1.0 + 1.0 / lt) * inner).sqrt()
}

/// Decreasing failure-probability sequence `delta_t`, clamped to at most 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DeltaRule {
    /// `(t log t)^-1`.
    TLogT,
    /// `t^-p`.
    Power { p: f64 },
    /// `exp(-t^beta)`.
    ExpPower { beta: f64 },
}

impl DeltaRule {
    pub fn validate(&self) -> Result<(), BoundError> {
        match *self {
            DeltaRule::TLogT => Ok(()),
            DeltaRule::Power { p } if p > 0.0 && p.is_finite() => Ok(()),
            DeltaRule::ExpPower { beta } if beta > 0.0 && beta.is_finite() => Ok(()),
            other => Err(BoundError::ParameterConstraint(format!(
                "{other:?}: exponent must be > 0"
            ))),
        }
    }

    pub fn delta_at(&self, t: u64) -> f64 {
        let x = t as f64;
        let raw = match *self {
            DeltaRule::TLogT => 1.0 / (x * x.ln()),
            DeltaRule::Power { p } => x.powf(-p),
            DeltaRule::ExpPower { beta } => (-x.powf(beta)).exp(),
        };
        if raw.is_nan() {
            1.0
        } else {
            raw.min(1.0)
        }
    }

    /// `tau_2(delta) = max{t : delta_t > delta}` by direct scan, 0 if empty.
    pub fn tau2_scan(&self, delta: f64, t_max: u64) -> u64 {
        let mut t = 0;
        while t < t_max && self.delta_at(t + 1) > delta {
            t += 1;
        }
        t
    }

    /// `tau_2(delta)` from the closed-form inverse, corrected to the exact integer.
    pub fn tau2(&self, delta: f64) -> u64 {
        if delta >= 1.0 {
            return 0;
        }
        let guess = match *self {
            DeltaRule::TLogT => {
                // t ln t = y  <=>  t = e^{W(y)}
                let y = 1.0 / delta;
                lambert_w0(y).exp()
            }
            DeltaRule::Power { p } => delta.powf(-1.0 / p),
            DeltaRule::ExpPower { beta } => (1.0 / delta).ln().powf(1.0 / beta),
        };
        let mut t = (guess.ceil() as u64).saturating_sub(1).max(1);
        while self.delta_at(t + 1) > delta {
            t += 1;
        }
        while t > 0 && self.delta_at(t) <= delta {
            t -= 1;
        }
        t
    }
}

/// Principal branch of the Lambert W function for `x >= 0`, by Newton iteration.
pub fn lambert_w0(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mut w = if x < 3.0 {
        (1.0 + x).ln() * 0.6
    } else {
        x.ln() - x.ln().ln()
    };
    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - x;
        let step = f / (ew * (w + 1.0));
        w -= step;
        if step.abs() <= 1e-15 * w.abs().max(1.0) {
            break;
        }
    }
    w
}
