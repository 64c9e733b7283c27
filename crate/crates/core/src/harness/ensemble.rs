use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent::{bandit_step, run_episode, AgentState, BanditState, BonusSchedule, RegretCache};
use crate::mdp::{optimal_values, MdpSpec};

use super::config::{fixture_hash, ExperimentConfig};
use super::seed::derive_seed;
use super::HarnessError;

pub const MAX_CHECKPOINTS: usize = 64;

/// At most 64 checkpoints in `1..=horizon`: log-spaced, plus `horizon / 2` and
/// `horizon` itself.
pub fn checkpoints(horizon: u64) -> Vec<u64> {
    assert!(horizon >= 1);
    if horizon <= MAX_CHECKPOINTS as u64 {
        return (1..=horizon).collect();
    }
    let top = (horizon as f64).ln();
    let n = MAX_CHECKPOINTS - 1;
    let mut out: Vec<u64> = (0..n)
        .map(|i| ((top * i as f64 / (n - 1) as f64).exp().round() as u64).clamp(1, horizon))
        .collect();
    out.push(horizon / 2);
    out.push(horizon);
    out.sort_unstable();
    out.dedup();
    out
}

/// Cumulative exact regret of `R` replications at shared checkpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct RegretEnsemble {
    pub checkpoints: Vec<u64>,
    pub seeds: Vec<u64>,
    /// `regret[j][i]`: replication `j` at `checkpoints[i]`.
    pub regret: Vec<Vec<f64>>,
    pub config_hash: String,
    pub fixture_hash: String,
}

/// Provenance written next to the ensemble CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub config: Option<ExperimentConfig>,
    pub horizon: u64,
    pub replications: usize,
    pub checkpoints: Vec<u64>,
    pub seeds: Vec<u64>,
    pub config_hash: String,
    pub fixture_hash: String,
    pub csv_sha256: String,
}

impl RegretEnsemble {
    pub fn replications(&self) -> usize {
        self.regret.len()
    }

    pub fn horizon(&self) -> u64 {
        *self.checkpoints.last().expect("nonempty")
    }

    pub fn column(&self, checkpoint: usize) -> Vec<f64> {
        self.regret.iter().map(|row| row[checkpoint]).collect()
    }

    /// Index of the final checkpoint, `K`.
    pub fn last(&self) -> usize {
        self.checkpoints.len() - 1
    }

    pub fn checkpoint_index(&self, k: u64) -> Option<usize> {
        self.checkpoints.iter().position(|&c| c == k)
    }

    /// `replication,checkpoint,regret` with round-trip float formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("replication,checkpoint,regret\n");
        for (j, row) in self.regret.iter().enumerate() {
            for (k, r) in self.checkpoints.iter().zip(row) {
                writeln!(out, "{j},{k},{r:?}").expect("string write");
            }
        }
        out
    }

    pub fn sidecar(&self, config: Option<&ExperimentConfig>) -> Sidecar {
        Sidecar {
            config: config.cloned(),
            horizon: self.horizon(),
            replications: self.replications(),
            checkpoints: self.checkpoints.clone(),
            seeds: self.seeds.clone(),
            config_hash: self.config_hash.clone(),
            fixture_hash: self.fixture_hash.clone(),
            csv_sha256: hex::encode(Sha256::digest(self.to_csv())),
        }
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`; returns the CSV path.
    pub fn write(&self, dir: &Path, stem: &str, config: Option<&ExperimentConfig>) -> Result<PathBuf, HarnessError> {
        fs::create_dir_all(dir).map_err(|e| HarnessError::Io(e.to_string()))?;
        let csv = dir.join(format!("{stem}.csv"));
        fs::write(&csv, self.to_csv()).map_err(|e| HarnessError::Io(e.to_string()))?;
        let side = serde_json::to_string_pretty(&self.sidecar(config)).expect("serializable");
        fs::write(dir.join(format!("{stem}.json")), side).map_err(|e| HarnessError::Io(e.to_string()))?;
        Ok(csv)
    }

    /// Reads a CSV written by [`RegretEnsemble::write`] together with its sidecar.
    pub fn read(csv_path: &Path) -> Result<(Self, Sidecar), HarnessError> {
        let io = |p: &Path, e: std::io::Error| HarnessError::MissingInput(format!("{}: {e}", p.display()));
        let text = fs::read_to_string(csv_path).map_err(|e| io(csv_path, e))?;
        let side_path = csv_path.with_extension("json");
        let side_text = fs::read_to_string(&side_path).map_err(|e| io(&side_path, e))?;
        let side: Sidecar = serde_json::from_str(&side_text).map_err(|e| HarnessError::Parse(e.to_string()))?;
        if hex::encode(Sha256::digest(&text)) != side.csv_sha256 {
            return Err(HarnessError::Provenance(format!(
                "{} does not match its sidecar hash",
                csv_path.display()
            )));
        }
        let c = side.checkpoints.len();
        let mut regret = vec![vec![f64::NAN; c]; side.replications];
        let mut lines = text.lines();
        if lines.next() != Some("replication,checkpoint,regret") {
            return Err(HarnessError::Parse("unexpected ensemble header".into()));
        }
        for (n, line) in lines.enumerate() {
            let bad = || HarnessError::Parse(format!("ensemble line {}: {line}", n + 2));
            let mut it = line.split(',');
            let j: usize = it.next().and_then(|x| x.parse().ok()).ok_or_else(bad)?;
            let k: u64 = it.next().and_then(|x| x.parse().ok()).ok_or_else(bad)?;
            let r: f64 = it.next().and_then(|x| x.parse().ok()).ok_or_else(bad)?;
            let i = side.checkpoints.iter().position(|&c| c == k).ok_or_else(bad)?;
            *regret.get_mut(j).and_then(|row| row.get_mut(i)).ok_or_else(bad)? = r;
        }
        if regret.iter().flatten().any(|r| r.is_nan()) {
            return Err(HarnessError::Parse("ensemble CSV is incomplete".into()));
        }
        Ok((
            RegretEnsemble {
                checkpoints: side.checkpoints.clone(),
                seeds: side.seeds.clone(),
                regret,
                config_hash: side.config_hash.clone(),
                fixture_hash: side.fixture_hash.clone(),
            },
            side,
        ))
    }
}

/// One replication's regret row and, optionally, its trace CSV rows.
fn replicate(
    mdp: &MdpSpec,
    bandit: bool,
    schedule: &BonusSchedule,
    horizon: u64,
    checkpoints: &[u64],
    seed: u64,
    replication: usize,
    trace: bool,
) -> (Vec<f64>, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut row = Vec::with_capacity(checkpoints.len());
    let mut log = String::new();
    let mut total = 0.0;
    let mut next = 0;
    if bandit {
        let means: Vec<f64> = (0..mdp.actions()).map(|a| mdp.mean_reward(0, 0, a)).collect();
        let best = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut st = BanditState::new(mdp.actions());
        for t in 1..=horizon {
            let (arm, reward) = bandit_step(mdp, &mut st, schedule, &mut rng);
            total += best - means[arm];
            if trace {
                writeln!(log, "{replication},{t},0,0,{arm},{reward:?},0").expect("string write");
            }
            if t == checkpoints[next] {
                row.push(total);
                next += 1;
            }
        }
    } else {
        let vt = optimal_values::<f64>(mdp);
        let mut st = AgentState::new(mdp);
        let mut cache = RegretCache::default();
        for k in 1..=horizon {
            let ep = run_episode(mdp, &vt, &mut st, schedule, &mut cache, &mut rng);
            total += ep.regret;
            if trace {
                log.push_str(&ep.csv_rows(replication));
            }
            if k == checkpoints[next] {
                row.push(total);
                next += 1;
            }
        }
    }
    (row, log)
}

/// A finished run: the ensemble and, if requested, the per-step trace CSV.
#[derive(Clone, Debug)]
pub struct EnsembleRun {
    pub ensemble: RegretEnsemble,
    pub traces: Option<String>,
}

pub const TRACE_HEADER: &str = "replication,k,h,s,a,reward,next_state";

/// Runs `config.replications` independent replications on `workers` threads.
///
/// Replication `j` draws from a ChaCha8 stream seeded with
/// `derive_seed(config.seed, j)`; rows are placed by index, so the result does
/// not depend on `workers`.
pub fn run_ensemble(config: &ExperimentConfig, workers: usize, traces: bool) -> Result<EnsembleRun, HarnessError> {
    config.validate()?;
    let mdp = config.mdp.load()?;
    let bandit = config.is_bandit(&mdp);
    if bandit && !mdp.is_bandit() {
        return Err(HarnessError::Config(
            "the bandit algorithm needs an instance with S = H = 1".into(),
        ));
    }
    let schedule = BonusSchedule::build(&config.schedule, config.schedule_context(&mdp))?;
    let cps = checkpoints(config.horizon);
    let seeds: Vec<u64> = (0..config.replications as u64)
        .map(|j| derive_seed(config.seed, j))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Io(e.to_string()))?;
    let rows: Vec<(Vec<f64>, String)> = pool.install(|| {
        seeds
            .par_iter()
            .enumerate()
            .map(|(j, &seed)| replicate(&mdp, bandit, &schedule, config.horizon, &cps, seed, j, traces))
            .collect()
    });
    let traces = traces.then(|| {
        let mut out = format!("{TRACE_HEADER}\n");
        rows.iter().for_each(|(_, t)| out.push_str(t));
        out
    });
    Ok(EnsembleRun {
        ensemble: RegretEnsemble {
            checkpoints: cps,
            seeds,
            regret: rows.into_iter().map(|(r, _)| r).collect(),
            config_hash: config.config_hash(&mdp),
            fixture_hash: fixture_hash(&mdp),
        },
        traces,
    })
}
