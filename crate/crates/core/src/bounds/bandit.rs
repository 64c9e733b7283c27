use serde::{Deserialize, Serialize};

use crate::scalar::ExtReal;

use super::curve::BoundPoint;
use super::ucb::{tight_ucb, DeltaRule};
use super::{check_delta, BoundError};

/// Form of the constant-`c1` bandit bound.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum C1Form {
    /// `s^2 T L/(2 c1) + c1 (A-1) + 2 s sqrt(A T L) + sum gap` with `L = log(4/delta)`.
    #[default]
    Formal,
    /// `s^2 T L / c1 + 1.5 c1 A + sum gap`.
    Simplified,
}

fn f(x: f64) -> ExtReal {
    ExtReal::Finite(x)
}

/// Distributional bound for the bandit algorithm with `c1,t = c1` and `c2,t = inf`.
pub fn thm_c1(t: u64, delta: f64, c1: f64, sigma: f64, gaps: &[f64], form: C1Form) -> Result<BoundPoint, BoundError> {
    check_delta(delta)?;
    if !(c1 > 0.0) {
        return Err(BoundError::ParameterConstraint(format!("c1 > 0, got {c1}")));
    }
    let (a, t) = (gaps.len() as f64, t as f64);
    let l = (4.0 / delta).ln();
    let gap_sum: f64 = gaps.iter().sum();
    Ok(match form {
        C1Form::Formal => BoundPoint::new(
            delta,
            vec![
                ("variance", f(sigma * sigma * t * l / (2.0 * c1))),
                ("c1", f(c1 * (a - 1.0))),
                ("sqrt", f(2.0 * sigma * (a * t * l).sqrt())),
                ("gaps", f(gap_sum)),
            ],
        ),
        C1Form::Simplified => BoundPoint::new(
            delta,
            vec![
                ("variance", f(sigma * sigma * t * l / c1)),
                ("c1", f(1.5 * c1 * a)),
                ("gaps", f(gap_sum)),
            ],
        ),
    })
}

/// The `c1 = sigma sqrt(T/A)` specialisation,
/// `sigma sqrt(AT) log(4 e^2/delta) / 2 + sigma sqrt(AT log(4/delta)) + sum gap`.
pub fn thm_c1_special(t: u64, delta: f64, sigma: f64, gaps: &[f64]) -> Result<BoundPoint, BoundError> {
    check_delta(delta)?;
    let root = sigma * (gaps.len() as f64 * t as f64).sqrt();
    let e2 = std::f64::consts::E * std::f64::consts::E;
    Ok(BoundPoint::new(
        delta,
        vec![
            ("log", f(0.5 * root * (4.0 * e2 / delta).ln())),
            ("sqrt", f(root * (4.0 / delta).ln().sqrt())),
            ("gaps", f(gaps.iter().sum())),
        ],
    ))
}

/// Expected-regret bound `4 sigma sqrt(AT) + sum gap`.
pub fn thm_c1_expected(t: u64, sigma: f64, gaps: &[f64]) -> f64 {
    4.0 * sigma * (gaps.len() as f64 * t as f64).sqrt() + gaps.iter().sum::<f64>()
}

/// Distributional bound for `c1,t = inf`, `c2,t = u(t, delta_t)`:
/// `tau2(delta) ^ T + sum gap + sum_{gap > 0} (c2,T + u(T, delta))^2 / gap`.
pub fn thm_c2(t: u64, delta: f64, rule: DeltaRule, sigma: f64, gaps: &[f64]) -> Result<BoundPoint, BoundError> {
    check_delta(delta)?;
    rule.validate()?;
    let arms = gaps.len();
    let tau2 = rule.tau2(delta).min(t);
    let c2 = tight_ucb(t, rule.delta_at(t), sigma, arms);
    let u = tight_ucb(t, delta, sigma, arms);
    let c2_term: f64 = gaps.iter().filter(|&&g| g > 0.0).map(|g| (c2 + u).powi(2) / g).sum();
    Ok(BoundPoint::new(
        delta,
        vec![
            ("tau2", f(tau2 as f64)),
            ("gaps", f(gaps.iter().sum())),
            ("c2", f(c2_term)),
        ],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubling_c1_trades_terms() {
        let g = [0.0, 0.3];
        let a = thm_c1(200, 0.1, 10.0, 1.0, &g, C1Form::Formal).unwrap();
        let b = thm_c1(200, 0.1, 20.0, 1.0, &g, C1Form::Formal).unwrap();
        let v = |p: &BoundPoint, n| p.component(n).unwrap().to_float();
        assert_eq!(v(&a, "variance"), 2.0 * v(&b, "variance"));
        assert_eq!(2.0 * v(&a, "c1"), v(&b, "c1"));
    }

    #[test]
    fn delta_above_one_is_rejected() {
        assert_eq!(
            thm_c1(10, 4.0, 1.0, 1.0, &[0.0], C1Form::Formal),
            Err(BoundError::InvalidDelta(4.0))
        );
    }

    #[test]
    fn tau2_vanishes_at_delta_one() {
        let p = thm_c2(100, 1.0, DeltaRule::Power { p: 2.0 }, 1.0, &[0.0, 0.3]).unwrap();
        assert_eq!(p.component("tau2"), Some(ExtReal::Finite(0.0)));
    }
}
