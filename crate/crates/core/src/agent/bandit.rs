use rand::Rng;

use crate::bounds::CoefficientSequence;
use crate::mdp::MdpSpec;
use crate::scalar::ExtReal;

/// Per-arm statistics for the bandit variant.
#[derive(Clone, Debug, PartialEq)]
pub struct BanditState {
    sums: Vec<f64>,
    counts: Vec<u64>,
    t: u64,
}

impl BanditState {
    pub fn new(arms: usize) -> Self {
        BanditState {
            sums: vec![0.0; arms],
            counts: vec![0; arms],
            t: 0,
        }
    }

    /// Steps taken so far.
    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn count(&self, arm: usize) -> u64 {
        self.counts[arm]
    }

    pub fn mean(&self, arm: usize) -> f64 {
        self.sums[arm] / self.counts[arm] as f64
    }

    /// Arm for step `steps() + 1`: round robin for the first `A` steps, then the
    /// largest `mean + (c1,t/N ^ c2,t/sqrt N)` with lowest-index ties.
    pub fn choose(&self, schedule: &dyn CoefficientSequence) -> usize {
        let t = self.t + 1;
        let arms = self.counts.len() as u64;
        if t <= arms {
            return (t - 1) as usize;
        }
        let (c1, c2) = (schedule.c1_at(t), schedule.c2_at(t));
        let mut best = 0;
        let mut best_index = ExtReal::Finite(f64::NEG_INFINITY);
        for a in 0..self.counts.len() {
            let n = self.counts[a] as f64;
            let b1 = c1.as_finite().map_or(ExtReal::Infinite, |c| ExtReal::Finite(c / n));
            let b2 = c2
                .as_finite()
                .map_or(ExtReal::Infinite, |c| ExtReal::Finite(c / n.sqrt()));
            let index = ExtReal::Finite(self.mean(a)) + b1.min(b2);
            if index > best_index {
                best = a;
                best_index = index;
            }
        }
        best
    }

    pub fn record(&mut self, arm: usize, reward: f64) {
        self.sums[arm] += reward;
        self.counts[arm] += 1;
        self.t += 1;
    }
}

/// One step of the bandit algorithm on an `S = H = 1` instance.
pub fn bandit_step<R: Rng + ?Sized>(
    mdp: &MdpSpec,
    state: &mut BanditState,
    schedule: &dyn CoefficientSequence,
    rng: &mut R,
) -> (usize, f64) {
    let arm = state.choose(schedule);
    let (reward, _) = mdp.sample_step(0, 0, arm, rng);
    state.record(arm, reward);
    (arm, reward)
}
