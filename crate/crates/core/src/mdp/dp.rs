use crate::scalar::Real;

use super::model::MdpSpec;
use super::MdpError;

/// Largest policy count that brute-force routines will enumerate.
pub const POLICY_ENUMERATION_CAP: u128 = 4096;

/// Deterministic Markov policy `(h, s) -> a`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Policy {
    states: usize,
    actions: Vec<usize>,
}

impl Policy {
    /// `actions[h * S + s]`.
    pub fn from_flat(states: usize, actions: Vec<usize>) -> Self {
        assert!(states > 0 && actions.len() % states == 0, "policy table must be H x S");
        Policy { states, actions }
    }

    pub fn constant(horizon: usize, states: usize, action: usize) -> Self {
        Policy::from_flat(states, vec![action; horizon * states])
    }

    pub fn from_fn(horizon: usize, states: usize, f: impl Fn(usize, usize) -> usize) -> Self {
        let actions = (0..horizon)
            .flat_map(|h| (0..states).map(move |s| (h, s)))
            .map(|(h, s)| f(h, s))
            .collect();
        Policy { states, actions }
    }

    pub fn action(&self, h: usize, s: usize) -> usize {
        self.actions[h * self.states + s]
    }

    pub fn set(&mut self, h: usize, s: usize, a: usize) {
        self.actions[h * self.states + s] = a;
    }

    pub fn horizon(&self) -> usize {
        self.actions.len() / self.states
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.actions
    }
}

/// Exact optimal values, gaps, and one optimal policy.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueTablesOf<T> {
    /// `v_star[h][s]` for `h` in `0..H`.
    pub v_star: Vec<Vec<T>>,
    /// `q_star[h][s][a]`.
    pub q_star: Vec<Vec<Vec<T>>>,
    /// `gap[h][s][a] = v_star[h][s] - q_star[h][s][a]`.
    pub gap: Vec<Vec<Vec<T>>>,
    /// Smallest strictly positive gap; `None` if every action is optimal.
    pub gap_min: Option<T>,
    pub pi_star: Policy,
}

impl<T: Real> ValueTablesOf<T> {
    /// `V*_{h}(s)` with `V*_H = 0`.
    pub fn v_next(&self, h: usize, s: usize) -> T {
        self.v_star.get(h).map_or(T::zero(), |row| row[s])
    }
}

fn expect_next<T: Real>(mdp: &MdpSpec, s: usize, a: usize, v_next: &[T]) -> T {
    mdp.transition_row(s, a)
        .iter()
        .zip(v_next)
        .fold(T::zero(), |acc, (&p, &v)| acc + T::of(p) * v)
}

/// Backward induction with lowest-index tie-breaking.
pub fn optimal_values<T: Real>(mdp: &MdpSpec) -> ValueTablesOf<T> {
    let (hh, ss, aa) = (mdp.horizon(), mdp.states(), mdp.actions());
    let mut v_star = vec![vec![T::zero(); ss]; hh];
    let mut q_star = vec![vec![vec![T::zero(); aa]; ss]; hh];
    let mut pi = Policy::constant(hh, ss, 0);
    let mut next = vec![T::zero(); ss];
    for h in (0..hh).rev() {
        for s in 0..ss {
            let mut best = 0;
            for a in 0..aa {
                let q = T::of(mdp.mean_reward(h, s, a)) + expect_next(mdp, s, a, &next);
                q_star[h][s][a] = q;
                if q > q_star[h][s][best] {
                    best = a;
                }
            }
            v_star[h][s] = q_star[h][s][best];
            pi.set(h, s, best);
        }
        next.clone_from(&v_star[h]);
    }
    let gap: Vec<Vec<Vec<T>>> = (0..hh)
        .map(|h| {
            (0..ss)
                .map(|s| q_star[h][s].iter().map(|&q| v_star[h][s] - q).collect())
                .collect()
        })
        .collect();
    let gap_min = gap
        .iter()
        .flatten()
        .flatten()
        .copied()
        .filter(|&g| g > T::zero())
        .fold(None, |m: Option<T>, g| Some(m.map_or(g, |m| m.min(g))));
    ValueTablesOf {
        v_star,
        q_star,
        gap,
        gap_min,
        pi_star: pi,
    }
}

/// Exact `V^pi_h(s)`, indexed `[h][s]`.
pub fn policy_value<T: Real>(mdp: &MdpSpec, pi: &Policy) -> Vec<Vec<T>> {
    let (hh, ss) = (mdp.horizon(), mdp.states());
    let mut out = vec![vec![T::zero(); ss]; hh];
    let mut next = vec![T::zero(); ss];
    for h in (0..hh).rev() {
        for s in 0..ss {
            let a = pi.action(h, s);
            out[h][s] = T::of(mdp.mean_reward(h, s, a)) + expect_next(mdp, s, a, &next);
        }
        next.clone_from(&out[h]);
    }
    out
}

/// Smallest and largest `V^pi_h(s)` over all deterministic policies, `h`, `s`.
pub fn value_range<T: Real>(mdp: &MdpSpec) -> (T, T) {
    let (hh, ss, aa) = (mdp.horizon(), mdp.states(), mdp.actions());
    let mut lo_next = vec![T::zero(); ss];
    let mut hi_next = vec![T::zero(); ss];
    let (mut lo, mut hi) = (T::infinity(), T::neg_infinity());
    for h in (0..hh).rev() {
        let mut lo_cur = vec![T::infinity(); ss];
        let mut hi_cur = vec![T::neg_infinity(); ss];
        for s in 0..ss {
            for a in 0..aa {
                let r = T::of(mdp.mean_reward(h, s, a));
                lo_cur[s] = lo_cur[s].min(r + expect_next(mdp, s, a, &lo_next));
                hi_cur[s] = hi_cur[s].max(r + expect_next(mdp, s, a, &hi_next));
            }
            lo = lo.min(lo_cur[s]);
            hi = hi.max(hi_cur[s]);
        }
        lo_next = lo_cur;
        hi_next = hi_cur;
    }
    (lo, hi)
}

/// All `A^(S*H)` deterministic Markov policies, refusing beyond `cap`.
pub fn enumerate_policies(mdp: &MdpSpec, cap: u128) -> Result<Vec<Policy>, MdpError> {
    let count = mdp.policy_count();
    if count > cap {
        return Err(MdpError::BruteForceTooLarge { count, cap });
    }
    let (hh, ss, aa) = (mdp.horizon(), mdp.states(), mdp.actions());
    let cells = hh * ss;
    Ok((0..count)
        .map(|mut idx| {
            let mut actions = vec![0; cells];
            for slot in actions.iter_mut() {
                *slot = (idx % aa as u128) as usize;
                idx /= aa as u128;
            }
            Policy::from_flat(ss, actions)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::fixtures;
    use approx::assert_abs_diff_eq;

    /// Expected return by expanding the full trajectory tree.
    fn tree_value(mdp: &MdpSpec, pi: &Policy, h: usize, s: usize) -> f64 {
        if h == mdp.horizon() {
            return 0.0;
        }
        let a = pi.action(h, s);
        let mut v = mdp.mean_reward(h, s, a);
        for (s2, &p) in mdp.transition_row(s, a).iter().enumerate() {
            if p > 0.0 {
                v += p * tree_value(mdp, pi, h + 1, s2);
            }
        }
        v
    }

    #[test]
    fn bandit_values_and_gaps() {
        let mdp = fixtures::two_arm_bernoulli(0.5, 0.2);
        let vt = optimal_values::<f64>(&mdp);
        assert_eq!(vt.v_star[0][0], 0.5);
        assert_eq!(vt.gap[0][0][0], 0.0);
        assert_abs_diff_eq!(vt.gap[0][0][1], 0.3, epsilon = 1e-15);
        assert_eq!(vt.pi_star.action(0, 0), 0);
        let pi = Policy::constant(1, 1, 1);
        assert_eq!(policy_value::<f64>(&mdp, &pi)[0][0], 0.2);
    }

    #[test]
    fn matches_policy_enumeration_on_fixture() {
        let mdp = fixtures::two_state();
        let vt = optimal_values::<f64>(&mdp);
        let policies = enumerate_policies(&mdp, POLICY_ENUMERATION_CAP).unwrap();
        assert_eq!(policies.len(), 16);
        for h in 0..mdp.horizon() {
            for s in 0..mdp.states() {
                let best = policies
                    .iter()
                    .map(|pi| tree_value(&mdp, pi, h, s))
                    .fold(f64::NEG_INFINITY, f64::max);
                assert_abs_diff_eq!(vt.v_star[h][s], best, epsilon = 1e-12);
            }
        }
        for pi in &policies {
            let v = policy_value::<f64>(&mdp, pi);
            assert_abs_diff_eq!(v[0][0], tree_value(&mdp, pi, 0, 0), epsilon = 1e-12);
        }
    }

    #[test]
    fn constant_rewards_have_no_gaps() {
        let mdp = fixtures::constant_reward(3, 2, 4, 0.25);
        let vt = optimal_values::<f64>(&mdp);
        for h in 0..4 {
            for s in 0..3 {
                assert_abs_diff_eq!(vt.v_star[h][s], 0.25 * (4 - h) as f64, epsilon = 1e-12);
            }
        }
        assert!(vt.gap_min.is_none());
    }

    #[test]
    fn optimal_policy_attains_optimal_values() {
        let mdp = fixtures::two_state();
        let vt = optimal_values::<f64>(&mdp);
        assert_eq!(policy_value::<f64>(&mdp, &vt.pi_star), vt.v_star);
    }

    #[test]
    fn single_precision_agrees() {
        let mdp = fixtures::two_state();
        let a = optimal_values::<f64>(&mdp);
        let b = optimal_values::<f32>(&mdp);
        assert!((a.v_star[0][0] - b.v_star[0][0] as f64).abs() < 1e-6);
        assert_eq!(a.pi_star, b.pi_star);
    }

    #[test]
    fn ties_break_to_lowest_index() {
        let mdp = fixtures::constant_reward(1, 3, 1, 0.5);
        assert_eq!(optimal_values::<f64>(&mdp).pi_star.action(0, 0), 0);
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let mdp = fixtures::constant_reward(4, 2, 4, 0.1);
        assert!(matches!(
            enumerate_policies(&mdp, POLICY_ENUMERATION_CAP),
            Err(MdpError::BruteForceTooLarge { .. })
        ));
    }
}
