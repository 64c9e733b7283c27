use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eqo_core::bounds::{expected_bound_via_integral, BoundCurve};
use eqo_core::concentration::{certification_matrix, CertConfig, CertRow, ConcentrationError};
use eqo_core::harness::{
    compare, empirical_mean, empirical_quantile, run_ensemble, BoundRequest, ExperimentConfig, HarnessError,
    RegretEnsemble, TRACE_HEADER,
};
use serde::de::DeserializeOwned;
use serde_json::Value;

mod overrides;
mod sweep;

const EXIT_FAIL: u8 = 1;
const EXIT_MISSING: u8 = 2;
const EXIT_INVALID: u8 = 3;
const EXIT_PROVENANCE: u8 = 4;

/// Error with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn missing(m: impl Into<String>) -> Self {
        CliError {
            code: EXIT_MISSING,
            message: m.into(),
        }
    }

    pub fn invalid(m: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INVALID,
            message: m.into(),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        let code = match e {
            HarnessError::FixtureNotFound(_) | HarnessError::MissingInput(_) | HarnessError::Io(_) => EXIT_MISSING,
            HarnessError::Provenance(_) | HarnessError::ResolutionMismatch { .. } => EXIT_PROVENANCE,
            _ => EXIT_INVALID,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<ConcentrationError> for CliError {
    fn from(e: ConcentrationError) -> Self {
        CliError::invalid(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "eqo-lab",
    version,
    about = "Regret simulation, bound curves and concentration checks"
)]
struct Cli {
    /// Worker threads for replications (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Print nothing but errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a replication ensemble and write `<name>.csv` plus a JSON sidecar.
    Simulate {
        config: PathBuf,
        /// Dotted-key override, e.g. `--set schedule.params.c1=2`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a bound over a grid of confidence levels.
    Bounds {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare an ensemble's empirical quantiles with a bound curve; exit 0 iff it holds.
    Compare {
        ensemble: PathBuf,
        bound: PathBuf,
        /// JSON report path (default: `<ensemble>.report.json`).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the concentration certification matrix and emit its CSV.
    ConcTest {
        #[arg(long, default_value_t = 100_000)]
        replications: usize,
        #[arg(long, default_value_t = 10_000)]
        n_max: usize,
        #[arg(long, default_value_t = CertConfig::default().seed)]
        seed: u64,
        /// CSV path (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an ensemble and a bound curve for every point of a parameter grid.
    Sweep {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub struct Ctx {
    pub workers: usize,
    pub quiet: bool,
}

impl Ctx {
    pub fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }
}

/// Reads a JSON document and applies dotted overrides.
pub fn load_doc(path: &Path, sets: &[String]) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::missing(format!("{}: {e}", path.display())))?;
    let mut doc: Value =
        serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    overrides::apply(&mut doc, sets).map_err(CliError::invalid)?;
    Ok(doc)
}

pub fn typed<T: DeserializeOwned>(doc: Value, what: &str) -> Result<T, CliError> {
    serde_json::from_value(doc).map_err(|e| CliError::invalid(format!("{what}: {e}")))
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into())
}

/// `--out`, then the config's own directory, then `EQO_LAB_OUT`, then `.`.
pub fn out_dir(flag: &Option<PathBuf>, configured: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .or_else(|| configured.clone())
        .or_else(|| std::env::var_os("EQO_LAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

pub fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::missing(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::missing(format!("{}: {e}", path.display())))
}

pub fn load_experiment(path: &Path, sets: &[String]) -> Result<ExperimentConfig, CliError> {
    let doc = load_doc(path, sets)?;
    let mut cfg: ExperimentConfig = typed(doc, "experiment config")?;
    cfg.validate()?;
    cfg.mdp.rebase(&base_dir(path));
    Ok(cfg)
}

pub fn load_bounds(path: &Path, sets: &[String]) -> Result<BoundRequest, CliError> {
    let doc = load_doc(path, sets)?;
    let mut req = BoundRequest::from_json(&doc.to_string())?;
    req.mdp.rebase(&base_dir(path));
    Ok(req)
}

/// Runs and writes one ensemble; returns the CSV path and the ensemble.
pub fn simulate_to(
    ctx: &Ctx,
    cfg: &ExperimentConfig,
    dir: &Path,
    name: &str,
) -> Result<(PathBuf, RegretEnsemble), CliError> {
    let run = run_ensemble(cfg, ctx.workers, cfg.output.traces)?;
    let csv = run.ensemble.write(dir, name, Some(cfg))?;
    if let Some(t) = &run.traces {
        debug_assert!(t.starts_with(TRACE_HEADER));
        write(&dir.join(format!("{name}.trace.csv")), t)?;
    }
    Ok((csv, run.ensemble))
}

pub fn summary(ens: &RegretEnsemble, deltas: &[f64]) -> String {
    let last = ens.last();
    let (mean, se) = empirical_mean(ens, last);
    let mut out = format!(
        "horizon {} | replications {} | mean regret {mean:.4} (se {se:.4})",
        ens.horizon(),
        ens.replications()
    );
    for &d in deltas {
        if let Ok(q) = empirical_quantile(ens, d, last) {
            out.push_str(&format!(
                "\n  delta {d:<8} quantile {:.4}  band [{:.4}, {:.4}]",
                q.value, q.lower, q.upper
            ));
        }
    }
    out
}

pub fn bounds_to(ctx: &Ctx, req: &BoundRequest, dir: &Path, name: &str) -> Result<(PathBuf, BoundCurve), CliError> {
    let curve = req.evaluate()?;
    let json = dir.join(format!("{name}.json"));
    write(&dir.join(format!("{name}.csv")), &curve.to_csv())?;
    write(&json, &serde_json::to_string_pretty(&curve).expect("serializable"))?;
    let vacuous = curve.points.iter().filter(|p| p.is_vacuous()).count();
    if vacuous > 0 {
        ctx.say(format!(
            "warning: {name} is vacuous (infinite) at {vacuous} of {} grid points",
            curve.points.len()
        ));
    }
    Ok((json, curve))
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let ctx = Ctx {
        workers: cli
            .workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
        quiet: cli.quiet,
    };
    match cli.command {
        Command::Simulate { config, overrides, out } => {
            let cfg = load_experiment(&config, &overrides)?;
            let dir = out_dir(&out, &cfg.output.dir);
            let name = cfg.output.name.clone().unwrap_or_else(|| stem(&config));
            let (csv, ens) = simulate_to(&ctx, &cfg, &dir, &name)?;
            ctx.say(format!("wrote {}", csv.display()));
            ctx.say(summary(&ens, &cfg.deltas));
            Ok(0)
        }
        Command::Bounds { config, overrides, out } => {
            let req = load_bounds(&config, &overrides)?;
            let dir = out_dir(&out, &req.output.dir);
            let name = req.output.name.clone().unwrap_or_else(|| stem(&config));
            let (json, curve) = bounds_to(&ctx, &req, &dir, &name)?;
            ctx.say(format!(
                "wrote {} ({} points)",
                json.with_extension("csv").display(),
                curve.points.len()
            ));
            match expected_bound_via_integral(&curve) {
                Ok(i) => ctx.say(format!(
                    "expected-regret bound (integral over delta): {}",
                    fmt_ext(i.value)
                )),
                Err(e) => ctx.say(format!("expected-regret bound not available: {e}")),
            }
            Ok(0)
        }
        Command::Compare {
            ensemble,
            bound,
            report,
        } => {
            let (ens, _) = RegretEnsemble::read(&ensemble)?;
            let text =
                fs::read_to_string(&bound).map_err(|e| CliError::missing(format!("{}: {e}", bound.display())))?;
            let curve: BoundCurve =
                serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("{}: {e}", bound.display())))?;
            let rep = compare(&ens, &curve)?;
            let path = report.unwrap_or_else(|| ensemble.with_extension("report.json"));
            write(&path, &serde_json::to_string_pretty(&rep).expect("serializable"))?;
            ctx.say(rep.table());
            Ok(if rep.pass { 0 } else { EXIT_FAIL })
        }
        Command::ConcTest {
            replications,
            n_max,
            seed,
            out,
        } => {
            if replications == 0 || n_max < 100 {
                return Err(CliError::invalid("replications >= 1 and n_max >= 100 required"));
            }
            let cfg = CertConfig {
                replications,
                n_max,
                seed,
                ..CertConfig::default()
            };
            let rows = certification_matrix(&cfg)?;
            let mut csv = format!("{}\n", CertRow::CSV_HEADER);
            for r in &rows {
                csv.push_str(&r.csv());
                csv.push('\n');
            }
            match out {
                Some(p) => {
                    write(&p, &csv)?;
                    ctx.say(format!("wrote {}", p.display()));
                }
                None => ctx.say(csv.trim_end()),
            }
            let failed = rows.iter().filter(|r| !r.pass).count();
            if failed > 0 {
                eprintln!("{failed} of {} cells exceed their violation band", rows.len());
                return Ok(EXIT_FAIL);
            }
            Ok(0)
        }
        Command::Sweep { config, overrides, out } => sweep::run(&ctx, &config, &overrides, &out),
    }
}

fn fmt_ext(v: eqo_core::ExtReal) -> String {
    match v {
        eqo_core::ExtReal::Finite(x) => format!("{x:.4}"),
        eqo_core::ExtReal::Infinite => "inf".into(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
