use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use super::ensemble::RegretEnsemble;
use super::HarnessError;

/// Coverage of the order-statistic band around each quantile.
pub const BAND_COVERAGE: f64 = 0.95;

/// Empirical `(1 - delta)`-quantile of one checkpoint column with its band.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantile {
    pub delta: f64,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// 1-based order-statistic ranks of `value`, `lower` and `upper`.
    pub ranks: (usize, usize, usize),
}

/// 1-based rank `ceil((1 - delta) R)`, at least 1.
pub fn quantile_rank(delta: f64, r: usize) -> usize {
    (((1.0 - delta) * r as f64) - 1e-9).ceil().max(1.0) as usize
}

/// Ranks `(L, U)` with `P(L <= B <= U - 1) >= 0.95` for `B ~ Bin(R, 1 - delta)`,
/// split evenly between the tails and clamped to `1..=R`.
///
/// `x_(L) <= q` iff at least `L` samples fall at or below the true quantile `q`,
/// and `x_(U) >= q` iff fewer than `U` fall strictly below it.
pub fn band_ranks(delta: f64, r: usize) -> (usize, usize) {
    let tail = (1.0 - BAND_COVERAGE) / 2.0;
    let b = Binomial::new(1.0 - delta, r as u64).expect("valid binomial");
    // Smallest u with P(B <= u - 1) >= 1 - tail.
    let mut u = 1;
    while u < r && b.cdf((u - 1) as u64) < 1.0 - tail {
        u += 1;
    }
    // Largest l with P(B <= l - 1) <= tail.
    let mut l = 1;
    while l < r && b.cdf(l as u64) <= tail {
        l += 1;
    }
    (l, u)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// `x_(ceil((1 - delta) R))` of the checkpoint column with a 95% band.
pub fn empirical_quantile(ens: &RegretEnsemble, delta: f64, checkpoint: usize) -> Result<Quantile, HarnessError> {
    let r = ens.replications();
    if !(delta <= 1.0 && delta * r as f64 >= 1.0 - 1e-9) {
        return Err(HarnessError::DeltaBelowResolution { delta, replications: r });
    }
    let x = sorted(ens.column(checkpoint));
    let i = quantile_rank(delta, r);
    let (l, u) = band_ranks(delta, r);
    Ok(Quantile {
        delta,
        value: x[i - 1],
        lower: x[l - 1],
        upper: x[u - 1],
        ranks: (i, l, u),
    })
}

/// Quantiles over `deltas`, ascending in `delta`.
pub fn quantile_curve(ens: &RegretEnsemble, deltas: &[f64], checkpoint: usize) -> Result<Vec<Quantile>, HarnessError> {
    let mut d = deltas.to_vec();
    d.sort_by(f64::total_cmp);
    d.iter()
        .map(|&delta| empirical_quantile(ens, delta, checkpoint))
        .collect()
}

/// Sample mean and its standard error (sample standard deviation over `sqrt R`).
pub fn empirical_mean(ens: &RegretEnsemble, checkpoint: usize) -> (f64, f64) {
    mean_se(&ens.column(checkpoint))
}

pub fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (mean, 0.0);
    }
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
