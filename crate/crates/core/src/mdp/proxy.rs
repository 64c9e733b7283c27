use serde::{Deserialize, Serialize};

use crate::scalar::Real;

use super::dp::{enumerate_policies, Policy, ValueTablesOf, POLICY_ENUMERATION_CAP};
use super::model::MdpSpec;
use super::reward::RewardModel;
use super::MdpError;

/// Whether `w_star` / `w_diff_star` are closed-form upper bounds or exact maxima.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProxyMode {
    #[default]
    Table1Bound,
    BruteForceExact,
}

/// Which sub-Gaussian RL bound on the maximal total variance proxy to report.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaussianWRule {
    /// `sigma^2 H + V_max^2`, as tabulated.
    #[default]
    Table,
    /// `sigma^2 H / 2 + V_max^2`, as derived.
    Derivation,
}

/// Noise class of an instance, which selects the closed-form constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum InstanceClass {
    /// Every reward lies in `[0, V_max]`.
    Bounded,
    /// Sub-Gaussian reward noise with the largest proxy `sigma2`.
    SubGaussianRl { sigma2: f64 },
    /// Sub-Gaussian bandit (`S = H = 1`).
    SubGaussianMab { sigma2: f64 },
    /// Some reward is only sub-exponential; `sigma2` and `alpha` are the largest
    /// certificate entries.
    SubExponential { sigma2: f64, alpha: f64 },
}

pub fn instance_class(mdp: &MdpSpec) -> InstanceClass {
    let models: Vec<&RewardModel> = mdp.reward_models().collect();
    if models.iter().all(|m| m.is_bounded()) {
        return InstanceClass::Bounded;
    }
    let proxies: Option<Vec<f64>> = models.iter().map(|m| m.sub_gaussian_proxy()).collect();
    match proxies {
        Some(p) => {
            let sigma2 = p.into_iter().fold(0.0, f64::max);
            if mdp.is_bandit() {
                InstanceClass::SubGaussianMab { sigma2 }
            } else {
                InstanceClass::SubGaussianRl { sigma2 }
            }
        }
        None => {
            let (sigma2, alpha) = models.iter().fold((0.0f64, 0.0f64), |(s, a), m| {
                let c = m.certificate();
                (s.max(c.sigma2), a.max(c.alpha))
            });
            InstanceClass::SubExponential { sigma2, alpha }
        }
    }
}

/// Variance-proxy function and the constants derived from it.
#[derive(Clone, Debug, PartialEq)]
pub struct VarianceProxyTablesOf<T> {
    /// `sigma_exp2[h][s][a]`.
    pub sigma_exp2: Vec<Vec<Vec<T>>>,
    pub w_star: T,
    pub w_diff_star: T,
    pub v_alpha: T,
    pub sigma_max: T,
    pub exactness: ProxyMode,
    pub class: InstanceClass,
}

fn next_value_variance<T: Real>(mdp: &MdpSpec, vt: &ValueTablesOf<T>, h: usize, s: usize, a: usize) -> T {
    if h + 1 >= mdp.horizon() {
        return T::zero();
    }
    let row = mdp.transition_row(s, a);
    let mean = row
        .iter()
        .enumerate()
        .fold(T::zero(), |acc, (j, &p)| acc + T::of(p) * vt.v_next(h + 1, j));
    row.iter().enumerate().fold(T::zero(), |acc, (j, &p)| {
        let d = vt.v_next(h + 1, j) - mean;
        acc + T::of(p) * d * d
    })
}

/// `W^pi_h(s) = E_pi[sum_{j >= h} sigma_exp2(j, s_j, a_j) / 2 | s_h = s]`, indexed `[h][s]`.
pub fn total_variance_proxy<T: Real>(mdp: &MdpSpec, sigma_exp2: &[Vec<Vec<T>>], pi: &Policy) -> Vec<Vec<T>> {
    let (hh, ss) = (mdp.horizon(), mdp.states());
    let half = T::of(0.5);
    let mut out = vec![vec![T::zero(); ss]; hh];
    for h in (0..hh).rev() {
        for s in 0..ss {
            let a = pi.action(h, s);
            let mut w = half * sigma_exp2[h][s][a];
            if h + 1 < hh {
                for (j, &p) in mdp.transition_row(s, a).iter().enumerate() {
                    w = w + T::of(p) * out[h + 1][j];
                }
            }
            out[h][s] = w;
        }
    }
    out
}

/// Per-pair variance proxies and the constants `W*`, `W*_diff`, `V_alpha`, `sigma_max`.
///
/// `BruteForceExact` enumerates all deterministic policies and refuses more
/// than [`POLICY_ENUMERATION_CAP`] of them.
pub fn variance_proxy<T: Real>(
    mdp: &MdpSpec,
    vt: &ValueTablesOf<T>,
    mode: ProxyMode,
    rule: GaussianWRule,
) -> Result<VarianceProxyTablesOf<T>, MdpError> {
    let (hh, ss, aa) = (mdp.horizon(), mdp.states(), mdp.actions());
    let class = instance_class(mdp);
    let v_max = T::of(mdp.v_max());
    let two = T::of(2.0);
    let mut sigma_exp2 = vec![vec![vec![T::zero(); aa]; ss]; hh];
    for h in 0..hh {
        for s in 0..ss {
            for a in 0..aa {
                let reward = mdp.reward(h, s, a);
                let var_v = next_value_variance(mdp, vt, h, s, a);
                sigma_exp2[h][s][a] = match class {
                    InstanceClass::Bounded => two * (T::of(reward.variance()) + var_v),
                    InstanceClass::SubGaussianMab { .. } => T::of(reward.sub_gaussian_proxy().unwrap_or(0.0)),
                    InstanceClass::SubGaussianRl { .. } => {
                        T::of(reward.sub_gaussian_proxy().unwrap_or(0.0)) + two * var_v
                    }
                    InstanceClass::SubExponential { .. } => T::of(reward.certificate().sigma2) + two * var_v,
                };
            }
        }
    }

    let horizon = T::of_u64(hh as u64);
    let vm2 = v_max * v_max;
    let (v_alpha, table_w, table_w_diff) = match class {
        InstanceClass::Bounded => (two * v_max, two * vm2, two * vm2),
        InstanceClass::SubGaussianMab { sigma2 } => (T::zero(), T::of(sigma2), T::zero()),
        InstanceClass::SubGaussianRl { sigma2 } | InstanceClass::SubExponential { sigma2, .. } => {
            let noise = match rule {
                GaussianWRule::Table => T::of(sigma2) * horizon,
                GaussianWRule::Derivation => T::of(sigma2) * horizon / two,
            };
            let alpha = match class {
                InstanceClass::SubExponential { alpha, .. } => T::of(alpha).max(v_max),
                _ => v_max,
            };
            (alpha, noise + vm2, vm2)
        }
    };

    let (w_star, w_diff_star) = match mode {
        ProxyMode::Table1Bound => (table_w, table_w_diff),
        ProxyMode::BruteForceExact => {
            let mut w_star = T::zero();
            let mut w_diff = T::zero();
            for pi in enumerate_policies(mdp, POLICY_ENUMERATION_CAP)? {
                for row in total_variance_proxy(mdp, &sigma_exp2, &pi) {
                    let lo = row.iter().copied().fold(T::infinity(), T::min);
                    let hi = row.iter().copied().fold(T::neg_infinity(), T::max);
                    w_star = w_star.max(hi);
                    w_diff = w_diff.max(hi - lo);
                }
            }
            (w_star, w_diff)
        }
    };

    let max_sigma = sigma_exp2
        .iter()
        .flatten()
        .flatten()
        .copied()
        .fold(T::zero(), T::max)
        .sqrt();
    let sigma_max = (two * max_sigma).max((two * v_alpha * v_max).sqrt());
    Ok(VarianceProxyTablesOf {
        sigma_exp2,
        w_star,
        w_diff_star,
        v_alpha,
        sigma_max,
        exactness: mode,
        class,
    })
}
