//! Bounds for the named schedules, with the schedule-specific sums in closed form.

use serde::{Deserialize, Serialize};

use crate::scalar::ExtReal;

use super::curve::BoundPoint;
use super::kappa::kappa_gap;
use super::rl::{pair_term, GapInput, RlInput};
use super::{check_delta, BoundError};

fn fin(x: f64) -> ExtReal {
    ExtReal::Finite(x)
}

fn constraint(msg: String) -> BoundError {
    BoundError::ParameterConstraint(msg)
}

fn threshold_factor(input: &RlInput<'_>) -> f64 {
    let c = &input.consts;
    (2.0 * (13.0 * c.w_diff).sqrt()).max(2.0 * c.v_alpha)
}

fn effective_pairs(gaps: Option<GapInput<'_>>, mut term: impl FnMut(f64) -> ExtReal) -> Result<ExtReal, BoundError> {
    let mut total = fin(0.0);
    if let Some(g) = gaps {
        for (s, row) in g.per_pair.iter().enumerate() {
            for (a, &gap) in row.iter().enumerate() {
                if !(gap > 0.0) {
                    return Err(BoundError::NonPositiveEffectiveGap { s, a, value: gap });
                }
                total = total + term(gap);
            }
        }
    }
    Ok(total)
}

/// Sqrt-growth schedule with `c2 = inf`:
/// `(36 log(1/delta)/(c1 l1(1,1)) + 36/c1 + 16 c1) V_max sqrt(K SA l1(iota_K,1) log KH)`
/// plus the lower-order term. `iota_K` is taken from the schedule's own
/// construction at `delta = 1`.
pub fn cor1(input: &RlInput<'_>, c1: f64, k: u64, delta: f64) -> Result<BoundPoint, BoundError> {
    check_delta(delta)?;
    if !(c1 > 0.0) {
        return Err(constraint(format!("c1 > 0, got {c1}")));
    }
    let l = &input.logs;
    let iota_k = input.lambda_iota(k, 1.0)?.iota(k) as u64;
    let lead = input.consts.v_max * (k as f64 * l.sa() * l.ell1(iota_k, 1.0) * l.log_kh(k)).sqrt();
    Ok(BoundPoint::new(
        delta,
        vec![
            (
                "log-delta",
                fin(36.0 * (1.0 / delta).ln() / (c1 * l.ell1(1, 1.0)) * lead),
            ),
            ("inverse-c1", fin(36.0 / c1 * lead)),
            ("c1", fin(16.0 * c1 * lead)),
            ("lower-order", fin(input.lower_order(k, delta, 72.0))),
        ],
    ))
}

/// Constants of the sqrt-growth plus Hoeffding schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cor2Params {
    pub c1: f64,
    pub c2: f64,
    /// `C` in `kappa_2 <= (2 + log KH)^2 exp(C log(1/delta) / c2^2)`.
    #[serde(default = "default_exp_constant")]
    pub exp_constant: f64,
}

fn default_exp_constant() -> f64 {
    4.0
}

impl Cor2Params {
    pub fn new(c1: f64, c2: f64) -> Self {
        Cor2Params {
            c1,
            c2,
            exp_constant: default_exp_constant(),
        }
    }
}

/// Explicit form of the sqrt-growth plus Hoeffding bound: `kappa` replaced by
/// `kappa_1 v kappa_2` with both in closed form, the first `kappa` summands
/// merged into the gap-limited sum, and the effective-gap pair terms.
pub fn cor2(
    input: &RlInput<'_>,
    p: Cor2Params,
    k: u64,
    delta: f64,
    gaps: Option<GapInput<'_>>,
) -> Result<BoundPoint, BoundError> {
    check_delta(delta)?;
    if !(p.c1 > 0.0) {
        return Err(constraint(format!("c1 > 0, got {}", p.c1)));
    }
    if !(p.c2 >= 2.0) {
        return Err(constraint(format!("c2 >= 2, got {}", p.c2)));
    }
    let c = &input.consts;
    if c.sigma_max * c.sigma_max > 2.0 * c.v_max * c.v_max {
        return Err(constraint(format!(
            "sigma_max^2 <= 2 V_max^2, got sigma_max = {} and V_max = {}",
            c.sigma_max, c.v_max
        )));
    }
    let l = &input.logs;
    let kappa2 = (2.0 + l.log_kh(k)).powi(2) * (p.exp_constant / (p.c2 * p.c2) * (1.0 / delta).ln()).exp();
    let thr = threshold_factor(input) * l.ell1(1, delta);
    let kappa1 = l.sa() * l.log_kh(k) / l.ell1(1, 1.0) * (thr / (p.c1 * c.v_max)).powi(2);
    let li = input.lambda_iota(k, delta)?;
    let kap = input.kappa(&li).value;
    let (c1k, c2k) = (input.schedule.c1_at(k), input.schedule.c2_at(k));
    let pairs = effective_pairs(gaps, |g| pair_term(c1k, c2k, g, 2048.0, 32.0))?;
    let upper = match gaps {
        Some(g) => kappa_gap(input.schedule, g.floor, c.w_star, &li, l)?.value.max(kap),
        None => kap,
    };
    Ok(BoundPoint::new(
        delta,
        vec![
            ("kappa", fin(c.v_max * (k as f64).min(kappa1.max(kappa2)))),
            ("pairs", pairs),
            ("gap-sum", fin(input.c1_sum(&li, 1, upper.min(k), 144.0))),
            ("lower-order", fin(input.lower_order(k, delta, 288.0))),
        ],
    ))
}

/// Constants of the power schedule `c1,k = c1 V_max (k/SA)^alpha`, `c2,k = c2 k^(beta/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cor3Params {
    pub c1: f64,
    pub c2: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Cor3Params {
    pub fn validate(&self) -> Result<(), BoundError> {
        if !(self.c1 > 0.0 && self.c2 > 0.0) {
            return Err(constraint(format!(
                "c1 > 0 and c2 > 0, got c1 = {}, c2 = {}",
                self.c1, self.c2
            )));
        }
        if !(0.5..=1.0).contains(&self.alpha) {
            return Err(constraint(format!("α ∈ [½,1] required, got α = {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta <= self.alpha) {
            return Err(constraint(format!("0 < β ≤ α required, got β = {}", self.beta)));
        }
        Ok(())
    }

    fn harmonic(&self, k: u64) -> f64 {
        let log_k = (k as f64).ln();
        if self.alpha >= 1.0 {
            log_k
        } else {
            (1.0 / (1.0 - self.alpha)).min(log_k)
        }
    }
}

// V_max (kappa_2 ^ K) with kappa_2 from c2 k^(beta/2) < (sigma_max + V_max/3) sqrt(l2(K, delta)).
fn kappa2_term(input: &RlInput<'_>, p: &Cor3Params, k: u64, delta: f64) -> f64 {
    let c = &input.consts;
    let scale = (c.sigma_max + c.v_max / 3.0) / p.c2;
    let k2 = scale.powf(2.0 / p.beta) * input.logs.ell2(k, delta).powf(1.0 / p.beta);
    c.v_max * k2.min(k as f64)
}

/// Worst-case bound for the power schedule.
pub fn cor3_worst_case(input: &RlInput<'_>, p: Cor3Params, k: u64, delta: f64) -> Result<BoundPoint, BoundError> {
    check_delta(delta)?;
    p.validate()?;
    let l = &input.logs;
    let v = input.consts.v_max;
    let (kf, sa) = (k as f64, l.sa());
    let iota_k = input.lambda_iota(k, delta)?.iota(k) as u64;
    let sum = 36.0 * v / p.c1 * p.harmonic(k) * kf.powf(1.0 - p.alpha) * sa.powf(p.alpha) * l.ell1(iota_k, delta);
    let c1_branch = 16.0 * p.c1 * v * kf.powf(p.alpha) * sa.powf(1.0 - p.alpha) * l.log_kh(k);
    let c2_branch = 16.0 * 2f64.sqrt() * p.c2 * (l.horizon as f64 * sa).sqrt() * kf.powf(p.beta + 0.5);
    Ok(BoundPoint::new(
        delta,
        vec![
            ("kappa", fin(kappa2_term(input, &p, k, delta))),
            ("c1-sum", fin(sum)),
            ("min-term", fin(c1_branch.min(c2_branch))),
            ("lower-order", fin(input.lower_order(k, delta, 72.0))),
        ],
    ))
}

/// Instance-dependent bound for the power schedule. `gaps` carries effective
/// gaps with `floor = v_gap`.
pub fn cor3_instance(
    input: &RlInput<'_>,
    p: Cor3Params,
    k: u64,
    delta: f64,
    gaps: Option<GapInput<'_>>,
) -> Result<BoundPoint, BoundError> {
    check_delta(delta)?;
    p.validate()?;
    let l = &input.logs;
    let c = &input.consts;
    let (kf, sa) = (k as f64, l.sa());
    let iota_k = input.lambda_iota(k, delta)?.iota(k) as u64;
    let ell = l.ell1(iota_k, delta);
    let kappa1 = sa * (threshold_factor(input) * ell / (p.c1 * c.v_max)).powf(1.0 / p.alpha);
    let kappa2 = kappa2_term(input, &p, k, delta) / c.v_max;
    let (gap_sum, pairs) = match gaps {
        Some(g) => {
            let inv = 1.0 / p.alpha;
            let s = 4.0
                * sa
                * p.harmonic(k)
                * (36.0 * c.w_star * ell / (p.c1 * c.v_max)).powf(inv)
                * (1.0 / g.floor).powf(inv - 1.0);
            let pairs = effective_pairs(gaps, |gap| fin(2048.0 * p.c2 * p.c2 * kf.powf(p.beta) / gap))?;
            (s, pairs)
        }
        None => (0.0, fin(0.0)),
    };
    Ok(BoundPoint::new(
        delta,
        vec![
            ("kappa", fin(c.v_max * kf.min(kappa1.max(kappa2)))),
            ("gap-sum", fin(gap_sum)),
            ("pairs", pairs),
            ("lower-order", fin(input.lower_order(k, delta, 288.0))),
        ],
    ))
}
