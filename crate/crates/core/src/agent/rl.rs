use rand::Rng;

use crate::bounds::CoefficientSequence;
use crate::mdp::{policy_value, MdpSpec, Policy};
use crate::ValueTables;

use super::bonus::{bonus, Bonus};
use super::AgentError;

/// One transition `(s, a, R, s')` at step `h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step {
    pub h: usize,
    pub s: usize,
    pub a: usize,
    pub reward: f64,
    pub next: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeTrace {
    pub k: u64,
    pub steps: Vec<Step>,
    /// `V*_1(s_1) - V^{pi_k}_1(s_1)`, exact.
    pub regret: f64,
}

impl EpisodeTrace {
    /// Rows `replication,k,h,s,a,reward,next_state`.
    pub fn csv_rows(&self, replication: usize) -> String {
        self.steps
            .iter()
            .map(|st| {
                format!(
                    "{replication},{},{},{},{},{:?},{}\n",
                    self.k, st.h, st.s, st.a, st.reward, st.next
                )
            })
            .collect()
    }
}

/// Optimistic estimates and the greedy policy for one episode.
#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    /// `q[h][s][a]`.
    pub q: Vec<Vec<Vec<f64>>>,
    /// `v[h][s]`.
    pub v: Vec<Vec<f64>>,
    pub policy: Policy,
}

/// Visit statistics accumulated over completed episodes.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentState {
    states: usize,
    actions: usize,
    horizon: usize,
    v_max: f64,
    counts: Vec<u64>,
    reward_sums: Vec<f64>,
    transitions: Vec<u64>,
    episodes: u64,
}

impl AgentState {
    pub fn new(mdp: &MdpSpec) -> Self {
        let (s, a) = (mdp.states(), mdp.actions());
        AgentState {
            states: s,
            actions: a,
            horizon: mdp.horizon(),
            v_max: mdp.v_max(),
            counts: vec![0; s * a],
            reward_sums: vec![0.0; s * a],
            transitions: vec![0; s * a * s],
            episodes: 0,
        }
    }

    fn idx(&self, s: usize, a: usize) -> usize {
        s * self.actions + a
    }

    /// Completed episodes; the next one is `episodes() + 1`.
    pub fn episodes(&self) -> u64 {
        self.episodes
    }

    pub fn count(&self, s: usize, a: usize) -> u64 {
        self.counts[self.idx(s, a)]
    }

    pub fn reward_sum(&self, s: usize, a: usize) -> f64 {
        self.reward_sums[self.idx(s, a)]
    }

    pub fn transition_count(&self, s: usize, a: usize, next: usize) -> u64 {
        self.transitions[self.idx(s, a) * self.states + next]
    }

    pub fn check_consistency(&self) -> Result<(), AgentError> {
        for s in 0..self.states {
            for a in 0..self.actions {
                let i = self.idx(s, a);
                let t: u64 = self.transitions[i * self.states..(i + 1) * self.states].iter().sum();
                if t != self.counts[i] {
                    return Err(AgentError::InconsistentCounts {
                        s,
                        a,
                        count: self.counts[i],
                        transitions: t,
                    });
                }
            }
        }
        Ok(())
    }

    /// Optimistic backward induction for episode `episodes() + 1`.
    pub fn plan(&self, schedule: &dyn CoefficientSequence) -> Plan {
        let (hh, ss, aa) = (self.horizon, self.states, self.actions);
        let k = self.episodes + 1;
        let (c1, c2) = (schedule.c1_at(k), schedule.c2_at(k));
        let mut q = vec![vec![vec![0.0; aa]; ss]; hh];
        let mut v = vec![vec![0.0; ss]; hh];
        let mut policy = Policy::constant(hh, ss, 0);
        for h in (0..hh).rev() {
            for s in 0..ss {
                for a in 0..aa {
                    let i = self.idx(s, a);
                    let n = self.counts[i];
                    q[h][s][a] = match bonus(c1, c2, n) {
                        Bonus::ForceVmax => self.v_max,
                        Bonus::Value(b) => {
                            let nf = n as f64;
                            let mut est = self.reward_sums[i] / nf;
                            if h + 1 < hh {
                                let row = &self.transitions[i * ss..(i + 1) * ss];
                                est += row.iter().zip(&v[h + 1]).map(|(&c, &vn)| c as f64 * vn).sum::<f64>() / nf;
                            }
                            match b.as_finite() {
                                Some(b) => (est.max(0.0) + b).min(self.v_max),
                                None => self.v_max,
                            }
                        }
                    };
                }
                let mut best = 0;
                for a in 1..aa {
                    if q[h][s][a] > q[h][s][best] {
                        best = a;
                    }
                }
                policy.set(h, s, best);
                v[h][s] = q[h][s][best];
            }
        }
        Plan { q, v, policy }
    }

    /// End-of-episode batch update.
    pub fn record(&mut self, steps: &[Step]) {
        for st in steps {
            let i = self.idx(st.s, st.a);
            self.counts[i] += 1;
            self.reward_sums[i] += st.reward;
            self.transitions[i * self.states + st.next] += 1;
        }
        self.episodes += 1;
    }
}

/// Regret of the last evaluated policy, reused while the policy is unchanged.
#[derive(Clone, Debug, Default)]
pub struct RegretCache {
    last: Option<(Policy, Vec<f64>)>,
}

impl RegretCache {
    /// `V*_1(s) - V^pi_1(s)`, clamped at 0 after checking it is not below `-1e-9`.
    pub fn regret(&mut self, mdp: &MdpSpec, vt: &ValueTables, pi: &Policy, s: usize) -> f64 {
        let hit = matches!(&self.last, Some((p, _)) if p == pi);
        if !hit {
            let v = policy_value::<f64>(mdp, pi);
            self.last = Some((pi.clone(), v[0].clone()));
        }
        let v1 = &self.last.as_ref().expect("filled above").1;
        let r = vt.v_star[0][s] - v1[s];
        assert!(r >= -1e-9, "policy value exceeds the optimum by {}", -r);
        r.max(0.0)
    }
}

/// Plans, executes one episode, updates the statistics, and returns the trace.
pub fn run_episode<R: Rng + ?Sized>(
    mdp: &MdpSpec,
    vt: &ValueTables,
    state: &mut AgentState,
    schedule: &dyn CoefficientSequence,
    cache: &mut RegretCache,
    rng: &mut R,
) -> EpisodeTrace {
    let k = state.episodes() + 1;
    let plan = state.plan(schedule);
    let s1 = mdp.initial_state(k);
    let mut s = s1;
    let mut steps = Vec::with_capacity(mdp.horizon());
    for h in 0..mdp.horizon() {
        let a = plan.policy.action(h, s);
        let (reward, next) = mdp.sample_step(h, s, a, rng);
        steps.push(Step { h, s, a, reward, next });
        s = next;
    }
    state.record(&steps);
    EpisodeTrace {
        k,
        steps,
        regret: cache.regret(mdp, vt, &plan.policy, s1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::FnSequence;
    use crate::mdp::{fixtures, optimal_values};
    use crate::scalar::ExtReal;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn first_episode_is_all_vmax() {
        let mdp = fixtures::two_state();
        let st = AgentState::new(&mdp);
        let seq = FnSequence(|_| ExtReal::Finite(1.0), |_| ExtReal::Infinite);
        let plan = st.plan(&seq);
        assert!(plan.q.iter().flatten().flatten().all(|&x| x == 1.0));
        assert!(plan.policy.as_slice().iter().all(|&a| a == 0));
    }

    #[test]
    fn batch_update_matches_recount() {
        let mdp = fixtures::two_state();
        let vt = optimal_values::<f64>(&mdp);
        let seq = FnSequence(|k| ExtReal::Finite((k as f64).sqrt()), |_| ExtReal::Infinite);
        let mut st = AgentState::new(&mdp);
        let mut cache = RegretCache::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let traces: Vec<_> = (0..200)
            .map(|_| run_episode(&mdp, &vt, &mut st, &seq, &mut cache, &mut rng))
            .collect();
        let mut fresh = AgentState::new(&mdp);
        for t in &traces {
            assert_eq!(t.steps.len(), mdp.horizon());
            fresh.record(&t.steps);
        }
        assert_eq!(fresh, st);
        st.check_consistency().unwrap();
    }

    #[test]
    fn clipping_at_vmax() {
        let mdp = fixtures::two_state();
        let mut st = AgentState::new(&mdp);
        st.record(&[Step {
            h: 0,
            s: 0,
            a: 0,
            reward: 0.9,
            next: 0,
        }]);
        let seq = FnSequence(|_| ExtReal::Finite(0.5), |_| ExtReal::Infinite);
        assert_eq!(st.plan(&seq).q[1][0][0], 1.0);
    }
}
