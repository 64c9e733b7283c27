//! The optimistic agent for episodic MDPs and bandits, and its bonus schedules.

use thiserror::Error;

use crate::bounds::BoundError;

mod bandit;
mod bonus;
mod rl;
mod schedule;

pub use bandit::{bandit_step, BanditState};
pub use bonus::{bonus, Bonus};
pub use rl::{run_episode, AgentState, EpisodeTrace, Plan, RegretCache, Step};
pub use schedule::{
    BonusSchedule, ConstantC1Params, HoeffdingParams, PowerParams, ScheduleContext, ScheduleSpec, SqrtGrowthParams,
    TightUcbParams,
};

#[derive(Debug, Error, PartialEq)]
pub enum AgentError {
    #[error("invalid exponents: {0}")]
    InvalidExponents(String),
    #[error("constant must be positive: {0}")]
    NonPositiveConstant(String),
    #[error("missing parameter: {0}")]
    MissingParameter(String),
    #[error("statistics inconsistent at (s = {s}, a = {a}): N = {count}, sum of transitions = {transitions}")]
    InconsistentCounts {
        s: usize,
        a: usize,
        count: u64,
        transitions: u64,
    },
    #[error(transparent)]
    Bound(#[from] BoundError),
}
