use serde::{Deserialize, Serialize};

use crate::scalar::Real;

use super::dp::{enumerate_policies, ValueTablesOf, POLICY_ENUMERATION_CAP};
use super::model::MdpSpec;
use super::MdpError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapChoice {
    /// `gap_h / 2  v  gap_min / (2H)`.
    #[default]
    HalfGapOrMin,
    /// Half gap, or the smallest conditional accumulated gap over reaching policies.
    ReturnGap,
}

/// Effective gap table and `v_gap`.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveGap<T> {
    /// `per_step[h][s][a]`.
    pub per_step: Vec<Vec<Vec<T>>>,
    /// `gap(s, a) = min_h per_step[h][s][a]`, indexed `[s][a]`.
    pub per_pair: Vec<Vec<T>>,
    pub v_gap: T,
}

/// Smallest gap at the first suboptimal step over all policies and trajectories.
///
/// A state is reachable at step `h` by a trajectory with no earlier mistake iff
/// it is reached from an initial state using zero-gap actions only, and at that
/// point any action may be taken. So `v_gap` is the smallest positive gap among
/// states reachable through optimal actions. Returns `None` when no action is
/// suboptimal.
pub fn v_gap<T: Real>(mdp: &MdpSpec, vt: &ValueTablesOf<T>) -> Option<T> {
    let (hh, ss, aa) = (mdp.horizon(), mdp.states(), mdp.actions());
    let mut reach = vec![false; ss];
    for s in mdp.initial_states() {
        reach[s] = true;
    }
    let mut best: Option<T> = None;
    for h in 0..hh {
        let mut next = vec![false; ss];
        for s in (0..ss).filter(|&s| reach[s]) {
            for a in 0..aa {
                let g = vt.gap[h][s][a];
                if g > T::zero() {
                    best = Some(best.map_or(g, |b| b.min(g)));
                } else {
                    for (j, &p) in mdp.transition_row(s, a).iter().enumerate() {
                        if p > 0.0 {
                            next[j] = true;
                        }
                    }
                }
            }
        }
        reach = next;
    }
    best
}

/// Effective gap table. Returns `Ok(None)` on all-optimal instances.
pub fn effective_gap<T: Real>(
    mdp: &MdpSpec,
    vt: &ValueTablesOf<T>,
    choice: GapChoice,
) -> Result<Option<EffectiveGap<T>>, MdpError> {
    let Some(gap_min) = vt.gap_min else {
        return Ok(None);
    };
    let (hh, ss, aa) = (mdp.horizon(), mdp.states(), mdp.actions());
    let half = T::of(0.5);
    let floor = gap_min / (T::of(2.0) * T::of_u64(hh as u64));
    let mut per_step: Vec<Vec<Vec<T>>> = (0..hh)
        .map(|h| {
            (0..ss)
                .map(|s| (0..aa).map(|a| (half * vt.gap[h][s][a]).max(floor)).collect())
                .collect()
        })
        .collect();

    if choice == GapChoice::ReturnGap {
        // Smallest E[sum_{h' <= h} gap | (s_h, a_h) = (s, a)] / (2H) over policies
        // and initial states that reach (s, a) at h with positive accumulated gap.
        let mut best: Vec<Vec<Vec<Option<T>>>> = vec![vec![vec![None; aa]; ss]; hh];
        for pi in enumerate_policies(mdp, POLICY_ENUMERATION_CAP)? {
            for s0 in mdp.initial_states() {
                let mut mass = vec![T::zero(); ss];
                let mut acc = vec![T::zero(); ss];
                mass[s0] = T::one();
                for h in 0..hh {
                    let mut mass_next = vec![T::zero(); ss];
                    let mut acc_next = vec![T::zero(); ss];
                    for s in 0..ss {
                        if mass[s] <= T::zero() {
                            continue;
                        }
                        let a = pi.action(h, s);
                        let total = acc[s] + mass[s] * vt.gap[h][s][a];
                        let cond = total / mass[s];
                        if cond > T::zero() {
                            let slot = &mut best[h][s][a];
                            *slot = Some(slot.map_or(cond, |b: T| b.min(cond)));
                        }
                        for (j, &p) in mdp.transition_row(s, a).iter().enumerate() {
                            mass_next[j] = mass_next[j] + T::of(p) * mass[s];
                            acc_next[j] = acc_next[j] + T::of(p) * total;
                        }
                    }
                    mass = mass_next;
                    acc = acc_next;
                }
            }
        }
        let scale = T::of(2.0) * T::of_u64(hh as u64);
        for h in 0..hh {
            for s in 0..ss {
                for a in 0..aa {
                    // Pairs never reached with positive accumulated gap do not enter
                    // the defining inequality; they keep the half-gap-or-min value.
                    if let Some(b) = best[h][s][a] {
                        per_step[h][s][a] = (half * vt.gap[h][s][a]).max(b / scale);
                    }
                }
            }
        }
    }

    let per_pair = (0..ss)
        .map(|s| {
            (0..aa)
                .map(|a| (0..hh).map(|h| per_step[h][s][a]).fold(T::infinity(), T::min))
                .collect()
        })
        .collect();
    let v_gap = v_gap(mdp, vt).unwrap_or(gap_min);
    Ok(Some(EffectiveGap {
        per_step,
        per_pair,
        v_gap,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::dp::{optimal_values, policy_value};
    use crate::mdp::fixtures;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bandit_effective_gap() {
        let mdp = fixtures::two_arm_bernoulli(0.5, 0.2);
        let vt = optimal_values::<f64>(&mdp);
        let eg = effective_gap(&mdp, &vt, GapChoice::HalfGapOrMin).unwrap().unwrap();
        assert_abs_diff_eq!(eg.per_step[0][0][1], 0.15, epsilon = 1e-15);
        assert_abs_diff_eq!(eg.per_step[0][0][0], 0.15, epsilon = 1e-15);
        assert_abs_diff_eq!(eg.v_gap, 0.3, epsilon = 1e-15);
    }

    #[test]
    fn all_optimal_instance_is_empty() {
        let mdp = fixtures::constant_reward(2, 2, 2, 0.3);
        let vt = optimal_values::<f64>(&mdp);
        assert!(effective_gap(&mdp, &vt, GapChoice::HalfGapOrMin).unwrap().is_none());
        assert!(v_gap(&mdp, &vt).is_none());
    }

    /// Minimum over policies and sampled-path prefixes of the first positive gap.
    fn v_gap_by_enumeration(mdp: &MdpSpec) -> f64 {
        let vt = optimal_values::<f64>(mdp);
        let mut best = f64::INFINITY;
        for pi in enumerate_policies(mdp, POLICY_ENUMERATION_CAP).unwrap() {
            fn walk(
                mdp: &MdpSpec,
                vt: &ValueTablesOf<f64>,
                pi: &crate::mdp::Policy,
                h: usize,
                s: usize,
                best: &mut f64,
            ) {
                if h == mdp.horizon() {
                    return;
                }
                let a = pi.action(h, s);
                let g = vt.gap[h][s][a];
                if g > 0.0 {
                    *best = best.min(g);
                    return;
                }
                for (j, &p) in mdp.transition_row(s, a).iter().enumerate() {
                    if p > 0.0 {
                        walk(mdp, vt, pi, h + 1, j, best);
                    }
                }
            }
            walk(mdp, &vt, &pi, 0, 0, &mut best);
        }
        best
    }

    #[test]
    fn v_gap_matches_enumeration_on_fixture() {
        let mdp = fixtures::two_state();
        let vt = optimal_values::<f64>(&mdp);
        let vg = v_gap(&mdp, &vt).unwrap();
        assert_eq!(vg, v_gap_by_enumeration(&mdp));
        assert_abs_diff_eq!(vg, vt.gap_min.unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn v_gap_can_exceed_gap_min() {
        // The smallest gap sits in state 0 at the last step, reachable only after a mistake.
        let mdp = fixtures::deterministic_chain();
        let vt = optimal_values::<f64>(&mdp);
        let vg = v_gap(&mdp, &vt).unwrap();
        assert_eq!(vg, v_gap_by_enumeration(&mdp));
        assert!(vg >= vt.gap_min.unwrap());
    }

    #[test]
    fn effective_gaps_satisfy_defining_inequality() {
        let mdp = fixtures::two_state();
        let vt = optimal_values::<f64>(&mdp);
        for choice in [GapChoice::HalfGapOrMin, GapChoice::ReturnGap] {
            let eg = effective_gap(&mdp, &vt, choice).unwrap().unwrap();
            for pi in enumerate_policies(&mdp, POLICY_ENUMERATION_CAP).unwrap() {
                // E[sum_{h >= B} gap_bar_h(s_h, a_h)] by trajectory expansion.
                fn lhs(
                    mdp: &MdpSpec,
                    vt: &ValueTablesOf<f64>,
                    eg: &EffectiveGap<f64>,
                    pi: &crate::mdp::Policy,
                    h: usize,
                    s: usize,
                    started: bool,
                ) -> f64 {
                    if h == mdp.horizon() {
                        return 0.0;
                    }
                    let a = pi.action(h, s);
                    let started = started || vt.gap[h][s][a] > 0.0;
                    let here = if started { eg.per_step[h][s][a] } else { 0.0 };
                    here + mdp
                        .transition_row(s, a)
                        .iter()
                        .enumerate()
                        .filter(|(_, &p)| p > 0.0)
                        .map(|(j, &p)| p * lhs(mdp, vt, eg, pi, h + 1, j, started))
                        .sum::<f64>()
                }
                let regret = vt.v_star[0][0] - policy_value::<f64>(&mdp, &pi)[0][0];
                assert!(lhs(&mdp, &vt, &eg, &pi, 0, 0, false) <= regret + 1e-12, "{choice:?}");
            }
        }
    }
}
