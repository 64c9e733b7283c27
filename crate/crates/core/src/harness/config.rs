use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent::{ScheduleContext, ScheduleSpec};
use crate::mdp::{fixtures, MdpError, MdpSpec};

use super::HarnessError;

/// Built-in fixture names.
pub const FIXTURES: [&str; 4] = [
    "two-arm-gaussian",
    "two-arm-bernoulli",
    "two-state",
    "deterministic-chain",
];

pub fn fixture(name: &str) -> Option<MdpSpec> {
    match name {
        "two-arm-gaussian" => Some(fixtures::two_arm_gaussian()),
        "two-arm-bernoulli" => Some(fixtures::two_arm_bernoulli(0.5, 0.2)),
        "two-state" => Some(fixtures::two_state()),
        "deterministic-chain" => Some(fixtures::deterministic_chain()),
        _ => None,
    }
}

/// `{"fixture": "<name>"}` or `{"path": "<file.json>"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MdpRef {
    Fixture(String),
    Path(PathBuf),
}

impl MdpRef {
    pub fn load(&self) -> Result<MdpSpec, HarnessError> {
        match self {
            MdpRef::Fixture(name) => fixture(name).ok_or_else(|| HarnessError::FixtureNotFound(name.clone())),
            MdpRef::Path(p) => {
                if !p.exists() {
                    return Err(HarnessError::FixtureNotFound(p.display().to_string()));
                }
                Ok(MdpSpec::load(p)?)
            }
        }
    }

    /// Makes a relative path relative to `base`.
    pub fn rebase(&mut self, base: &Path) {
        if let MdpRef::Path(p) = self {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Bandit variant on `S = H = 1` instances, episodic otherwise.
    #[default]
    Auto,
    Rl,
    Bandit,
}

fn default_deltas() -> Vec<f64> {
    vec![0.5, 0.2, 0.1, 0.05, 0.01]
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// File stem of the ensemble CSV and sidecar.
    #[serde(default)]
    pub name: Option<String>,
    /// Also write per-step traces.
    #[serde(default)]
    pub traces: bool,
}

/// One experiment: instance, schedule, horizon, replications and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mdp: MdpRef,
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub algorithm: Algorithm,
    /// `K` episodes, or `T` steps for the bandit variant.
    pub horizon: u64,
    pub replications: usize,
    pub seed: u64,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.replications == 0 {
            return Err(HarnessError::Config("replications must be at least 1".into()));
        }
        if self.horizon == 0 {
            return Err(HarnessError::Config("horizon must be at least 1".into()));
        }
        if let Some(d) = self.deltas.iter().find(|d| !(**d > 0.0 && **d <= 1.0)) {
            return Err(HarnessError::Config(format!("delta must lie in (0, 1], got {d}")));
        }
        Ok(())
    }

    pub fn is_bandit(&self, mdp: &MdpSpec) -> bool {
        match self.algorithm {
            Algorithm::Auto => mdp.is_bandit(),
            Algorithm::Rl => false,
            Algorithm::Bandit => true,
        }
    }

    pub fn schedule_context(&self, mdp: &MdpSpec) -> ScheduleContext {
        ScheduleContext {
            states: mdp.states(),
            actions: mdp.actions(),
            horizon: mdp.horizon(),
            v_max: mdp.v_max(),
            k_max: self.horizon,
            sigma: noise_level(mdp),
        }
    }

    /// sha256 over the config (without output settings) and the resolved instance.
    pub fn config_hash(&self, mdp: &MdpSpec) -> String {
        let mut c = self.clone();
        c.output = OutputConfig::default();
        if let MdpRef::Path(_) = c.mdp {
            c.mdp = MdpRef::Path(PathBuf::new());
        }
        let mut h = Sha256::new();
        h.update(serde_json::to_string(&c).expect("serializable"));
        h.update(fixture_hash(mdp));
        hex::encode(h.finalize())
    }
}

/// Largest sub-Gaussian noise level over the reward models, if all have one.
pub fn noise_level(mdp: &MdpSpec) -> Option<f64> {
    mdp.reward_models()
        .map(|r| r.sub_gaussian_proxy())
        .try_fold(0.0f64, |m, p| p.map(|p| m.max(p)))
        .map(f64::sqrt)
}

/// sha256 of the instance's canonical JSON.
pub fn fixture_hash(mdp: &MdpSpec) -> String {
    hex::encode(Sha256::digest(mdp.to_json()))
}

impl From<MdpError> for HarnessError {
    fn from(e: MdpError) -> Self {
        HarnessError::Mdp(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "mdp": {"fixture": "two-arm-gaussian"},
        "schedule": {"schedule": "constant-c1", "params": {}},
        "horizon": 10, "replications": 2, "seed": 1
    }"#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.algorithm, Algorithm::Auto);
        assert_eq!(c.deltas.len(), 5);
        let mdp = c.mdp.load().unwrap();
        assert!(c.is_bandit(&mdp));
        assert_eq!(noise_level(&mdp), Some(1.0));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("\"seed\": 1", "\"seed\": 1, \"sede\": 2");
        assert!(matches!(
            ExperimentConfig::from_json(&text),
            Err(HarnessError::Config(_))
        ));
    }

    #[test]
    fn missing_fixture() {
        let r = MdpRef::Fixture("nope".into()).load();
        assert_eq!(r.unwrap_err(), HarnessError::FixtureNotFound("nope".into()));
    }

    #[test]
    fn hash_ignores_output_but_not_seed() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        let mdp = c.mdp.load().unwrap();
        let mut d = c.clone();
        d.output.dir = Some("elsewhere".into());
        assert_eq!(c.config_hash(&mdp), d.config_hash(&mdp));
        d.seed = 2;
        assert_ne!(c.config_hash(&mdp), d.config_hash(&mdp));
    }
}
