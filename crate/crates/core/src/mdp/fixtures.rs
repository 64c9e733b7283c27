//! Small instances used by tests, the acceptance suite, and the CLI examples.

use rand::Rng;

use super::model::{build_mdp, InitialSchedule, MdpSpec, RawMdp, RewardSpec};
use super::reward::RewardModel;

/// Two-arm Bernoulli bandit, `v_max = 1`.
pub fn two_arm_bernoulli(m0: f64, m1: f64) -> MdpSpec {
    let arm = |mean| RewardModel::BoundedBernoulliScaled { mean, range: 1.0 };
    MdpSpec::bandit(vec![arm(m0), arm(m1)], 1.0).expect("valid bandit")
}

/// Gaussian bandit with common noise level `sigma`, `v_max = 1`.
pub fn gaussian_bandit(means: &[f64], sigma: f64) -> MdpSpec {
    let arms = means
        .iter()
        .map(|&mean| RewardModel::Gaussian {
            mean,
            variance: sigma * sigma,
        })
        .collect();
    MdpSpec::bandit(arms, 1.0).expect("valid bandit")
}

/// The two-arm gaussian bandit with means `{0.5, 0.2}` and `sigma = 1`.
pub fn two_arm_gaussian() -> MdpSpec {
    gaussian_bandit(&[0.5, 0.2], 1.0)
}

/// Two states, two actions, `H = 2`, Bernoulli rewards of range 0.5, `v_max = 1`.
///
/// Action 0 is optimal everywhere; gaps are 0.44 at the first step and 0.4 at
/// the second.
pub fn two_state_json() -> String {
    r#"{
  "S": 2,
  "A": 2,
  "H": 2,
  "v_max": 1.0,
  "initial_state": 0,
  "P": [
    [[0.9, 0.1], [0.1, 0.9]],
    [[0.5, 0.5], [0.5, 0.5]]
  ],
  "rewards": {
    "shared": [
      [
        {"kind": "bounded-bernoulli-scaled", "mean": 0.45, "range": 0.5},
        {"kind": "bounded-bernoulli-scaled", "mean": 0.05, "range": 0.5}
      ],
      [
        {"kind": "bounded-bernoulli-scaled", "mean": 0.4, "range": 0.5},
        {"kind": "bounded-bernoulli-scaled", "mean": 0.0, "range": 0.5}
      ]
    ]
  }
}"#
    .to_string()
}

pub fn two_state() -> MdpSpec {
    MdpSpec::from_json(&two_state_json()).expect("valid fixture")
}

/// Deterministic two-state chain: action 1 moves to state 1, action 0 stays.
pub fn deterministic_chain() -> MdpSpec {
    let d = |mean| RewardModel::Degenerate { mean };
    build_mdp(RawMdp {
        states: 2,
        actions: 2,
        horizon: 2,
        v_max: 1.0,
        initial_state: 0,
        initial_schedule: InitialSchedule::Fixed,
        transitions: vec![
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![0.0, 1.0], vec![0.0, 1.0]],
        ],
        rewards: RewardSpec::Shared(vec![vec![d(0.1), d(0.2)], vec![d(0.5), d(0.3)]]),
    })
    .expect("valid fixture")
}

/// Every reward is the constant `c`; transitions are uniform.
pub fn constant_reward(states: usize, actions: usize, horizon: usize, c: f64) -> MdpSpec {
    build_mdp(RawMdp {
        states,
        actions,
        horizon,
        v_max: c * horizon as f64,
        initial_state: 0,
        initial_schedule: InitialSchedule::Fixed,
        transitions: vec![vec![vec![1.0 / states as f64; states]; actions]; states],
        rewards: RewardSpec::Shared(vec![vec![RewardModel::Degenerate { mean: c }; actions]; states]),
    })
    .expect("valid fixture")
}

/// Noise family used by [`random_small`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RandomNoise {
    Bounded,
    Gaussian,
}

/// Random instance with per-step rewards and `v_max = 1`.
///
/// Mean rewards lie in `[0, 1/H]` so every policy value is in `[0, 1]`.
/// Some transition rows are made sparse to exercise zero-probability branches.
pub fn random_small<R: Rng + ?Sized>(
    rng: &mut R,
    states: usize,
    actions: usize,
    horizon: usize,
    noise: RandomNoise,
) -> MdpSpec {
    let per_step = 1.0 / horizon as f64;
    let transitions = (0..states)
        .map(|_| {
            (0..actions)
                .map(|_| {
                    let mut row: Vec<f64> = (0..states)
                        .map(|_| {
                            if rng.random::<f64>() < 0.25 {
                                0.0
                            } else {
                                rng.random::<f64>()
                            }
                        })
                        .collect();
                    if row.iter().all(|&p| p == 0.0) {
                        row[rng.random_range(0..states)] = 1.0;
                    }
                    let sum: f64 = row.iter().sum();
                    row.iter_mut().for_each(|p| *p /= sum);
                    row
                })
                .collect()
        })
        .collect();
    let rewards = (0..horizon)
        .map(|_| {
            (0..states)
                .map(|_| {
                    (0..actions)
                        .map(|_| {
                            let mean = per_step * rng.random::<f64>();
                            match noise {
                                RandomNoise::Bounded => RewardModel::BoundedBernoulliScaled { mean, range: per_step },
                                RandomNoise::Gaussian => RewardModel::Gaussian {
                                    mean,
                                    variance: 0.05 + 0.2 * rng.random::<f64>(),
                                },
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    build_mdp(RawMdp {
        states,
        actions,
        horizon,
        v_max: 1.0,
        initial_state: 0,
        initial_schedule: InitialSchedule::Fixed,
        transitions,
        rewards: RewardSpec::PerStep(rewards),
    })
    .expect("random instance is valid by construction")
}
