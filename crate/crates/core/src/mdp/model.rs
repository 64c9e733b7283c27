use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dp;
use super::reward::RewardModel;
use super::MdpError;

/// Rows off by at most this much are renormalized.
pub const ROW_REPAIR_TOLERANCE: f64 = 1e-9;
/// Post-repair stochasticity assertion.
pub const ROW_ASSERT_TOLERANCE: f64 = 1e-12;
/// Instances with `S * A * H` at most this size get the exhaustive value-range check.
pub const VALUE_CHECK_MAX_SIZE: usize = 64;

/// How the initial state of each episode is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialSchedule {
    /// Always `initial_state`.
    #[default]
    Fixed,
    /// Episode `k` (1-based) starts in `(initial_state + k - 1) mod S`.
    Cyclic,
}

/// Rewards are either shared across steps or given per `(h, s, a)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RewardSpec {
    /// Indexed `[s][a]`.
    Shared(Vec<Vec<RewardModel>>),
    /// Indexed `[h][s][a]`.
    PerStep(Vec<Vec<Vec<RewardModel>>>),
}

/// The JSON fixture document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMdp {
    #[serde(rename = "S")]
    pub states: usize,
    #[serde(rename = "A")]
    pub actions: usize,
    #[serde(rename = "H")]
    pub horizon: usize,
    pub v_max: f64,
    pub initial_state: usize,
    #[serde(default, skip_serializing_if = "is_fixed")]
    pub initial_schedule: InitialSchedule,
    /// Indexed `[s][a][s']`.
    #[serde(rename = "P")]
    pub transitions: Vec<Vec<Vec<f64>>>,
    pub rewards: RewardSpec,
}

fn is_fixed(s: &InitialSchedule) -> bool {
    *s == InitialSchedule::Fixed
}

/// A validated tabular episodic MDP. Bandits are the `S = H = 1` case.
///
/// Steps are 0-based in code: `h = 0` is the first step of an episode.
#[derive(Clone, Debug, PartialEq)]
pub struct MdpSpec {
    states: usize,
    actions: usize,
    horizon: usize,
    v_max: f64,
    initial_state: usize,
    initial_schedule: InitialSchedule,
    /// Flat `[(s * A + a) * S + s']`.
    transitions: Vec<f64>,
    rewards: RewardSpec,
}

impl MdpSpec {
    pub fn states(&self) -> usize {
        self.states
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    pub fn initial_schedule(&self) -> InitialSchedule {
        self.initial_schedule
    }

    pub fn is_bandit(&self) -> bool {
        self.states == 1 && self.horizon == 1
    }

    /// Initial state for 1-based episode `k`.
    pub fn initial_state(&self, k: u64) -> usize {
        match self.initial_schedule {
            InitialSchedule::Fixed => self.initial_state,
            InitialSchedule::Cyclic => {
                ((self.initial_state as u64 + k.saturating_sub(1)) % self.states as u64) as usize
            }
        }
    }

    /// States the initial-state schedule can produce.
    pub fn initial_states(&self) -> Vec<usize> {
        match self.initial_schedule {
            InitialSchedule::Fixed => vec![self.initial_state],
            InitialSchedule::Cyclic => (0..self.states).collect(),
        }
    }

    /// `P(. | s, a)`.
    pub fn transition_row(&self, s: usize, a: usize) -> &[f64] {
        let start = (s * self.actions + a) * self.states;
        &self.transitions[start..start + self.states]
    }

    pub fn reward(&self, h: usize, s: usize, a: usize) -> &RewardModel {
        match &self.rewards {
            RewardSpec::Shared(r) => &r[s][a],
            RewardSpec::PerStep(r) => &r[h][s][a],
        }
    }

    pub fn mean_reward(&self, h: usize, s: usize, a: usize) -> f64 {
        self.reward(h, s, a).mean()
    }

    pub fn reward_models(&self) -> impl Iterator<Item = &RewardModel> {
        let (h, s, a) = (self.horizon, self.states, self.actions);
        (0..h).flat_map(move |hh| (0..s).flat_map(move |ss| (0..a).map(move |aa| self.reward(hh, ss, aa))))
    }

    /// Number of deterministic Markov policies, `A^(S*H)`, saturating.
    pub fn policy_count(&self) -> u128 {
        let exp = (self.states * self.horizon) as u32;
        (self.actions as u128).checked_pow(exp).unwrap_or(u128::MAX)
    }

    /// Draws `(reward, next_state)` for taking `a` in `s` at step `h`.
    pub fn sample_step<R: Rng + ?Sized>(&self, h: usize, s: usize, a: usize, rng: &mut R) -> (f64, usize) {
        let reward = self.reward(h, s, a).sample(rng);
        let row = self.transition_row(s, a);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut next = row.len() - 1;
        for (j, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                next = j;
                break;
            }
        }
        // Land on a state with positive mass if rounding pushed u past the last one.
        while row[next] == 0.0 && next > 0 {
            next -= 1;
        }
        (reward, next)
    }

    pub fn to_raw(&self) -> RawMdp {
        let transitions = (0..self.states)
            .map(|s| (0..self.actions).map(|a| self.transition_row(s, a).to_vec()).collect())
            .collect();
        RawMdp {
            states: self.states,
            actions: self.actions,
            horizon: self.horizon,
            v_max: self.v_max,
            initial_state: self.initial_state,
            initial_schedule: self.initial_schedule,
            transitions,
            rewards: self.rewards.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, MdpError> {
        let raw: RawMdp = serde_json::from_str(text).map_err(|e| MdpError::Parse(e.to_string()))?;
        build_mdp(raw)
    }

    pub fn load(path: &Path) -> Result<Self, MdpError> {
        let text = std::fs::read_to_string(path).map_err(|e| MdpError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Multi-armed bandit with one reward model per arm and `v_max`.
    pub fn bandit(arms: Vec<RewardModel>, v_max: f64) -> Result<Self, MdpError> {
        let a = arms.len();
        build_mdp(RawMdp {
            states: 1,
            actions: a,
            horizon: 1,
            v_max,
            initial_state: 0,
            initial_schedule: InitialSchedule::Fixed,
            transitions: vec![vec![vec![1.0]; a]],
            rewards: RewardSpec::Shared(vec![arms]),
        })
    }
}

/// Validates a raw document into an [`MdpSpec`].
///
/// Rows off by at most 1e-9 are renormalized; everything else that breaks
/// stochasticity is rejected. Instances with `S*A*H <= 64` additionally get
/// an exact check that every deterministic policy value lies in `[0, v_max]`.
pub fn build_mdp(raw: RawMdp) -> Result<MdpSpec, MdpError> {
    let RawMdp {
        states,
        actions,
        horizon,
        v_max,
        initial_state,
        initial_schedule,
        transitions,
        rewards,
    } = raw;
    if states == 0 || actions == 0 || horizon == 0 {
        return Err(MdpError::Dimension(format!(
            "S, A, H must be >= 1 (got S={states}, A={actions}, H={horizon})"
        )));
    }
    if !(v_max.is_finite() && v_max >= 0.0) {
        return Err(MdpError::Dimension(format!(
            "v_max must be finite and >= 0, got {v_max}"
        )));
    }
    if initial_state >= states {
        return Err(MdpError::Dimension(format!(
            "initial_state {initial_state} >= S={states}"
        )));
    }
    if transitions.len() != states {
        return Err(MdpError::Dimension(format!(
            "P has {} source states, expected {states}",
            transitions.len()
        )));
    }
    let mut flat = Vec::with_capacity(states * actions * states);
    for (s, per_action) in transitions.into_iter().enumerate() {
        if per_action.len() != actions {
            return Err(MdpError::Dimension(format!(
                "P[{s}] has {} actions, expected {actions}",
                per_action.len()
            )));
        }
        for (a, mut row) in per_action.into_iter().enumerate() {
            if row.len() != states {
                return Err(MdpError::Dimension(format!(
                    "P[{s}][{a}] has length {}, expected {states}",
                    row.len()
                )));
            }
            if let Some(&p) = row.iter().find(|p| !p.is_finite() || **p < 0.0) {
                return Err(MdpError::NegativeProbability { s, a, value: p });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_REPAIR_TOLERANCE {
                return Err(MdpError::NonStochasticRow { s, a, sum });
            }
            if sum != 1.0 {
                row.iter_mut().for_each(|p| *p /= sum);
            }
            let repaired: f64 = row.iter().sum();
            assert!(
                (repaired - 1.0).abs() <= ROW_ASSERT_TOLERANCE,
                "row ({s},{a}) sums to {repaired}"
            );
            flat.extend(row);
        }
    }

    let check_grid = |grid: &Vec<Vec<RewardModel>>, label: String| -> Result<(), MdpError> {
        if grid.len() != states || grid.iter().any(|r| r.len() != actions) {
            return Err(MdpError::Dimension(format!(
                "{label} rewards must be {states} x {actions}"
            )));
        }
        for (s, row) in grid.iter().enumerate() {
            for (a, m) in row.iter().enumerate() {
                m.validate(v_max)
                    .map_err(|msg| MdpError::InvalidReward(format!("{label}[{s}][{a}]: {msg}")))?;
            }
        }
        Ok(())
    };
    match &rewards {
        RewardSpec::Shared(grid) => check_grid(grid, "shared".into())?,
        RewardSpec::PerStep(steps) => {
            if steps.len() != horizon {
                return Err(MdpError::Dimension(format!(
                    "per_step rewards have {} steps, expected {horizon}",
                    steps.len()
                )));
            }
            for (h, grid) in steps.iter().enumerate() {
                check_grid(grid, format!("step {h}"))?;
            }
        }
    }

    let mdp = MdpSpec {
        states,
        actions,
        horizon,
        v_max,
        initial_state,
        initial_schedule,
        transitions: flat,
        rewards,
    };

    if states * actions * horizon <= VALUE_CHECK_MAX_SIZE {
        let (lo, hi) = dp::value_range::<f64>(&mdp);
        let slack = 1e-9 * v_max.max(1.0);
        if lo < -slack || hi > v_max + slack {
            return Err(MdpError::ValueRangeViolation {
                min: lo,
                max: hi,
                v_max,
            });
        }
    }
    Ok(mdp)
}
