use serde::{Deserialize, Serialize};

use crate::scalar::ExtReal;

use super::lambda::LambdaIota;
use super::logs::LogFactors;
use super::{BoundError, CoefficientSequence, ProxyConstants};

/// Result of a `max{k <= k_max : predicate}` scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Kappa {
    /// 0 when the predicate never holds.
    pub value: u64,
    /// The predicate still holds at `k_max`, so the true value may be larger.
    pub saturated: bool,
}

fn kappa_holds(
    seq: &dyn CoefficientSequence,
    k: u64,
    consts: &ProxyConstants,
    li: &LambdaIota,
    logs: &LogFactors,
) -> bool {
    let c1 = seq.c1_at(k);
    if c1.lt(li.threshold) {
        return true;
    }
    let correction = match c1 {
        ExtReal::Finite(c) => 6.0 * li.w_diff * logs.ell1(li.iota(k) as u64, li.delta) / c,
        ExtReal::Infinite => 0.0,
    };
    seq.c2_at(k)
        .lt((consts.sigma_max + correction) * logs.ell2(k, li.delta).sqrt())
}

fn kappa_gap_holds(
    seq: &dyn CoefficientSequence,
    k: u64,
    gap: f64,
    w_star: f64,
    li: &LambdaIota,
    logs: &LogFactors,
) -> bool {
    seq.c1_at(k)
        .lt(36.0 * w_star * logs.ell1(li.iota(k) as u64, li.delta) / gap)
}

fn scan_down(k_max: u64, holds: impl Fn(u64) -> bool) -> Kappa {
    match (1..=k_max).rev().find(|&k| holds(k)) {
        Some(k) => Kappa {
            value: k,
            saturated: k == k_max,
        },
        None => Kappa {
            value: 0,
            saturated: false,
        },
    }
}

fn scan_up(k_max: u64, holds: impl Fn(u64) -> bool) -> Kappa {
    let mut last = 0;
    for k in 1..=k_max {
        if holds(k) {
            last = k;
        }
    }
    Kappa {
        value: last,
        saturated: last == k_max && k_max > 0,
    }
}

/// `kappa(delta)` over `k <= li.k_max()`, at the confidence level `li` was built for.
pub fn kappa(seq: &dyn CoefficientSequence, consts: &ProxyConstants, li: &LambdaIota, logs: &LogFactors) -> Kappa {
    scan_down(li.k_max(), |k| kappa_holds(seq, k, consts, li, logs))
}

/// Forward linear scan of the raw predicate.
pub fn kappa_reference(
    seq: &dyn CoefficientSequence,
    consts: &ProxyConstants,
    li: &LambdaIota,
    logs: &LogFactors,
) -> Kappa {
    scan_up(li.k_max(), |k| kappa_holds(seq, k, consts, li, logs))
}

/// `kappa_gap(gap, delta) = max{k : c1,k < 36 W* l1(iota_k, delta) / gap}`.
pub fn kappa_gap(
    seq: &dyn CoefficientSequence,
    gap: f64,
    w_star: f64,
    li: &LambdaIota,
    logs: &LogFactors,
) -> Result<Kappa, BoundError> {
    if !(gap > 0.0) {
        return Err(BoundError::NonPositiveGap(gap));
    }
    Ok(scan_down(li.k_max(), |k| {
        kappa_gap_holds(seq, k, gap, w_star, li, logs)
    }))
}

pub fn kappa_gap_reference(
    seq: &dyn CoefficientSequence,
    gap: f64,
    w_star: f64,
    li: &LambdaIota,
    logs: &LogFactors,
) -> Result<Kappa, BoundError> {
    if !(gap > 0.0) {
        return Err(BoundError::NonPositiveGap(gap));
    }
    Ok(scan_up(li.k_max(), |k| kappa_gap_holds(seq, k, gap, w_star, li, logs)))
}
