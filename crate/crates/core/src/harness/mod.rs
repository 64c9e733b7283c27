//! Seeded parallel replication, empirical regret quantiles, and bound comparison.

use thiserror::Error;

use crate::agent::AgentError;
use crate::bounds::BoundError;

mod bound_request;
mod compare;
mod config;
mod ensemble;
mod seed;
mod stats;

pub use bound_request::{BoundRequest, BoundSpec, GridConfig};
pub use compare::{compare, ViolationReport, ViolationRow};
pub use config::{fixture, fixture_hash, noise_level, Algorithm, ExperimentConfig, MdpRef, OutputConfig, FIXTURES};
pub use ensemble::{checkpoints, run_ensemble, EnsembleRun, RegretEnsemble, Sidecar, MAX_CHECKPOINTS, TRACE_HEADER};
pub use seed::derive_seed;
pub use stats::{
    band_ranks, empirical_mean, empirical_quantile, mean_se, quantile_curve, quantile_rank, Quantile, BAND_COVERAGE,
};

#[derive(Debug, Error, PartialEq)]
pub enum HarnessError {
    #[error("fixture not found: {0}")]
    FixtureNotFound(String),
    #[error("invalid instance: {0}")]
    Mdp(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("schedule: {0}")]
    Schedule(#[from] AgentError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error("delta = {delta} is below the resolution 1/R of {replications} replications")]
    DeltaBelowResolution { delta: f64, replications: usize },
    #[error("no bound point is resolvable with {replications} replications")]
    ResolutionMismatch { replications: usize },
    #[error("provenance mismatch: {0}")]
    Provenance(String),
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io: {0}")]
    Io(String),
}
