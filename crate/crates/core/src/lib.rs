pub mod agent;
pub mod bounds;
pub mod concentration;
pub mod harness;
pub mod mdp;
pub mod scalar;

pub use scalar::{ExtReal, Real};

pub type ValueTables = mdp::ValueTablesOf<f64>;
pub type VarianceProxyTables = mdp::VarianceProxyTablesOf<f64>;
