use serde::{Deserialize, Serialize};

use crate::scalar::ExtReal;

use super::curve::BoundPoint;
use super::kappa::{kappa, kappa_gap, Kappa};
use super::lambda::{lambda_iota, LambdaIota};
use super::logs::LogFactors;
use super::{check_delta, BoundError, CoefficientSequence, ProxyConstants};

/// Which gap-dependent statement to evaluate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapVariant {
    /// Effective gaps with constants 2048 / 64 and `kappa_gap(v_gap)`.
    #[default]
    Formal,
    /// Raw gaps floored at `gap_min / H`, constants 4096 / 64 and `kappa_gap(gap_min)`.
    MainText,
}

/// Everything an RL bound needs besides `(K, delta)`.
pub struct RlInput<'a> {
    pub logs: LogFactors,
    pub consts: ProxyConstants,
    pub schedule: &'a dyn CoefficientSequence,
}

/// Per-pair gaps for the gap-dependent bound.
///
/// Under [`GapVariant::Formal`] `per_pair` holds effective gaps and `floor` is
/// `v_gap`; under [`GapVariant::MainText`] it holds `min_h gap_h(s, a)` and
/// `floor` is `gap_min`.
#[derive(Clone, Copy, Debug)]
pub struct GapInput<'a> {
    pub per_pair: &'a [Vec<f64>],
    pub floor: f64,
}

impl RlInput<'_> {
    pub fn lambda_iota(&self, k: u64, delta: f64) -> Result<LambdaIota, BoundError> {
        lambda_iota(
            |j| self.schedule.c1_at(j),
            delta,
            self.consts.w_diff,
            self.consts.v_alpha,
            k,
            self.logs,
        )
    }

    pub fn kappa(&self, li: &LambdaIota) -> Kappa {
        kappa(self.schedule, &self.consts, li, &self.logs)
    }

    /// `sum_{k = from}^{to} coef W* l1(iota_k, delta) / c1,k`, with infinite `c1,k` contributing 0.
    pub fn c1_sum(&self, li: &LambdaIota, from: u64, to: u64, coef: f64) -> f64 {
        (from..=to)
            .filter_map(|k| {
                self.schedule
                    .c1_at(k)
                    .as_finite()
                    .map(|c| coef * self.consts.w_star * self.logs.ell1(li.iota(k) as u64, li.delta) / c)
            })
            .sum()
    }

    /// `c V_max S^2 A l2(K, delta) log 2KH`.
    pub fn lower_order(&self, k: u64, delta: f64, coef: f64) -> f64 {
        let l = &self.logs;
        let s = l.states as f64;
        coef * self.consts.v_max
            * s
            * s
            * l.actions as f64
            * l.ell2(k, delta)
            * (2.0 * k as f64 * l.horizon as f64).ln()
    }
}

/// Gap-independent distributional bound at `(K, delta)`.
pub fn thm_b1(input: &RlInput<'_>, k: u64, delta: f64) -> Result<BoundPoint, BoundError> {
    check_delta(delta)?;
    let li = input.lambda_iota(k, delta)?;
    let kap = input.kappa(&li).value.min(k);
    let l = &input.logs;
    let c1_branch = input.schedule.c1_at(k).scale(16.0 * l.sa() * l.log_kh(k));
    let hsak = l.horizon as f64 * l.sa() * k as f64;
    let c2_branch = input.schedule.c2_at(k).scale(16.0 * 2f64.sqrt() * hsak.sqrt());
    Ok(BoundPoint::new(
        delta,
        vec![
            ("kappa", ExtReal::Finite(input.consts.v_max * kap as f64)),
            ("c1-sum", ExtReal::Finite(input.c1_sum(&li, kap + 1, k, 18.0))),
            ("min-term", c1_branch.min(c2_branch)),
            ("lower-order", ExtReal::Finite(input.lower_order(k, delta, 72.0))),
        ],
    ))
}

/// `(a c2^2 / g) ^ (64 c1 log(b c1 / g))_+` for one pair.
pub(crate) fn pair_term(c1: ExtReal, c2: ExtReal, g: f64, a: f64, b: f64) -> ExtReal {
    let sq = match c2 {
        ExtReal::Finite(c) => ExtReal::Finite(a * c * c / g),
        ExtReal::Infinite => ExtReal::Infinite,
    };
    let lg = match c1 {
        ExtReal::Finite(c) => ExtReal::Finite((64.0 * c * (b * c / g).ln()).max(0.0)),
        ExtReal::Infinite => ExtReal::Infinite,
    };
    sq.min(lg)
}

/// Gap-dependent distributional bound at `(K, delta)`. `gaps = None` is the
/// all-optimal instance, where the pair sum and the gap-limited sum are empty.
pub fn thm_e1(
    input: &RlInput<'_>,
    k: u64,
    delta: f64,
    gaps: Option<GapInput<'_>>,
    variant: GapVariant,
) -> Result<BoundPoint, BoundError> {
    check_delta(delta)?;
    let li = input.lambda_iota(k, delta)?;
    let kap = input.kappa(&li).value.min(k);
    let (c1, c2) = (input.schedule.c1_at(k), input.schedule.c2_at(k));
    let mut pairs = ExtReal::Finite(0.0);
    let mut gap_sum = 0.0;
    if let Some(g) = gaps {
        let horizon = input.logs.horizon as f64;
        for (s, row) in g.per_pair.iter().enumerate() {
            for (a, &gap) in row.iter().enumerate() {
                let term = match variant {
                    GapVariant::Formal => {
                        if !(gap > 0.0) {
                            return Err(BoundError::NonPositiveEffectiveGap { s, a, value: gap });
                        }
                        pair_term(c1, c2, gap, 2048.0, 32.0)
                    }
                    GapVariant::MainText => {
                        let d = gap.max(g.floor / horizon);
                        if !(d > 0.0) {
                            return Err(BoundError::NonPositiveEffectiveGap { s, a, value: d });
                        }
                        pair_term(c1, c2, d, 4096.0, 64.0)
                    }
                };
                pairs = pairs + term;
            }
        }
        let kg = kappa_gap(input.schedule, g.floor, input.consts.w_star, &li, &input.logs)?;
        gap_sum = input.c1_sum(&li, kap + 1, kg.value.min(k), 144.0);
    }
    Ok(BoundPoint::new(
        delta,
        vec![
            ("kappa", ExtReal::Finite(input.consts.v_max * kap as f64)),
            ("pairs", pairs),
            ("gap-sum", ExtReal::Finite(gap_sum)),
            ("lower-order", ExtReal::Finite(input.lower_order(k, delta, 288.0))),
        ],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::FnSequence;

    fn consts() -> ProxyConstants {
        ProxyConstants {
            v_max: 1.0,
            w_star: 2.0,
            w_diff: 2.0,
            v_alpha: 2.0,
            sigma_max: 2.0,
        }
    }

    #[test]
    fn saturated_kappa_truncates_sum() {
        let seq = FnSequence(|_| ExtReal::Finite(1.0), |_| ExtReal::Infinite);
        let input = RlInput {
            logs: LogFactors::new(2, 2, 2),
            consts: consts(),
            schedule: &seq,
        };
        let p = thm_b1(&input, 100, 0.1).unwrap();
        assert_eq!(p.component("kappa"), Some(ExtReal::Finite(100.0)));
        assert_eq!(p.component("c1-sum"), Some(ExtReal::Finite(0.0)));
    }

    #[test]
    fn constant_c1_sum_is_linear() {
        let c1 = 1e5;
        let seq = FnSequence(move |_| ExtReal::Finite(c1), |_| ExtReal::Infinite);
        let logs = LogFactors::new(2, 2, 2);
        let input = RlInput {
            logs,
            consts: consts(),
            schedule: &seq,
        };
        let p = thm_b1(&input, 1000, 0.1).unwrap();
        let expect = 1000.0 * 18.0 * 2.0 * logs.ell1(1, 0.1) / c1;
        assert!((p.component("c1-sum").unwrap().to_float() - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn pair_term_branches() {
        assert_eq!(
            pair_term(ExtReal::Infinite, ExtReal::Finite(2.0), 0.5, 2048.0, 32.0),
            ExtReal::Finite(2048.0 * 8.0)
        );
        assert_eq!(
            pair_term(ExtReal::Finite(1.0), ExtReal::Infinite, 64.0, 2048.0, 32.0),
            ExtReal::Finite(0.0)
        );
        assert!(pair_term(ExtReal::Infinite, ExtReal::Infinite, 1.0, 2048.0, 32.0).is_infinite());
    }
}
