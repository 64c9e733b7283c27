//! Tabular episodic MDPs, reward models, and exact dynamic-programming oracles.

mod dp;
pub mod fixtures;
mod gap;
mod model;
mod proxy;
mod reward;

use thiserror::Error;

pub use dp::{
    enumerate_policies, optimal_values, policy_value, value_range, Policy, ValueTablesOf, POLICY_ENUMERATION_CAP,
};
pub use gap::{effective_gap, v_gap, EffectiveGap, GapChoice};
pub use model::{
    build_mdp, InitialSchedule, MdpSpec, RawMdp, RewardSpec, ROW_ASSERT_TOLERANCE, ROW_REPAIR_TOLERANCE,
    VALUE_CHECK_MAX_SIZE,
};
pub use proxy::{
    instance_class, total_variance_proxy, variance_proxy, GaussianWRule, InstanceClass, ProxyMode,
    VarianceProxyTablesOf,
};
pub use reward::{RewardModel, SubExpCertificate};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MdpError {
    #[error("transition row ({s}, {a}) sums to {sum}, off by more than 1e-9")]
    NonStochasticRow { s: usize, a: usize, sum: f64 },
    #[error("transition row ({s}, {a}) has invalid probability {value}")]
    NegativeProbability { s: usize, a: usize, value: f64 },
    #[error("policy values span [{min}, {max}], outside [0, v_max={v_max}]")]
    ValueRangeViolation { min: f64, max: f64, v_max: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid reward: {0}")]
    InvalidReward(String),
    #[error("{count} deterministic policies exceed the enumeration cap of {cap}")]
    BruteForceTooLarge { count: u128, cap: u128 },
    #[error("cannot parse MDP document: {0}")]
    Parse(String),
    #[error("cannot read MDP document: {0}")]
    Io(String),
}
