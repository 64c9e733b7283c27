use std::path::{Path, PathBuf};

use eqo_core::harness::{compare, empirical_mean, BoundRequest, ExperimentConfig};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::overrides::{parse, set};
use crate::{bounds_to, load_doc, out_dir, simulate_to, typed, write, CliError, Ctx};

pub const DEFAULT_MAX_POINTS: usize = 256;

fn default_max() -> usize {
    DEFAULT_MAX_POINTS
}

/// Keys set together to each value in turn. Keys start with `experiment.` or `bounds.`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub keys: Vec<String>,
    pub values: Vec<Value>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub experiment: Value,
    #[serde(default)]
    pub bounds: Option<Value>,
    pub axes: Vec<Axis>,
    #[serde(default = "default_max")]
    pub max_points: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

/// Cartesian product of axis value indices, last axis fastest.
pub fn grid(axes: &[Axis]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for ax in axes {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..ax.values.len()).map(move |i| {
                    let mut q = p.clone();
                    q.push(i);
                    q
                })
            })
            .collect();
    }
    out
}

fn rebase(doc: &mut Value, base: &Path) {
    if let Some(Value::String(p)) = doc.pointer("/mdp/path").cloned() {
        if Path::new(&p).is_relative() {
            doc["mdp"]["path"] = Value::String(base.join(p).to_string_lossy().into_owned());
        }
    }
}

pub fn run(ctx: &Ctx, path: &Path, sets: &[String], out: &Option<PathBuf>) -> Result<u8, CliError> {
    let cfg: SweepConfig = typed(load_doc(path, sets)?, "sweep config")?;
    let points = if cfg.axes.iter().any(|a| a.values.is_empty()) || cfg.axes.is_empty() {
        Vec::new()
    } else {
        grid(&cfg.axes)
    };
    if points.is_empty() {
        return Err(CliError::invalid("sweep grid is empty"));
    }
    if points.len() > cfg.max_points {
        return Err(CliError::invalid(format!(
            "sweep grid has {} points, above the cap of {}",
            points.len(),
            cfg.max_points
        )));
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let dir = out_dir(out, &cfg.out);
    let mut doc = json!({ "experiment": cfg.experiment, "bounds": cfg.bounds });
    rebase(&mut doc["experiment"], &base);
    if doc["bounds"].is_object() {
        rebase(&mut doc["bounds"], &base);
    }
    let mut index = Vec::new();
    for (n, p) in points.iter().enumerate() {
        let mut d = doc.clone();
        let mut settings = serde_json::Map::new();
        for (ax, &i) in cfg.axes.iter().zip(p) {
            for key in &ax.keys {
                let (path, _) = parse(&format!("{key}=null")).map_err(CliError::invalid)?;
                if !matches!(path[0].as_str(), "experiment" | "bounds") {
                    return Err(CliError::invalid(format!(
                        "sweep key {key:?} must start with experiment. or bounds."
                    )));
                }
                set(&mut d, &path, ax.values[i].clone()).map_err(CliError::invalid)?;
                settings.insert(key.clone(), ax.values[i].clone());
            }
        }
        let name = format!("point-{n:03}");
        let pdir = dir.join(&name);
        let exp: ExperimentConfig = typed(d["experiment"].take(), "experiment config")?;
        exp.validate()?;
        let (csv, ens) = simulate_to(ctx, &exp, &pdir, "ensemble")?;
        let (mean, se) = empirical_mean(&ens, ens.last());
        let mut entry = json!({
            "point": n,
            "settings": settings,
            "ensemble": csv,
            "mean_regret": mean,
            "se": se,
        });
        if d["bounds"].is_object() {
            let req = BoundRequest::from_json(&d["bounds"].to_string())?;
            let (json_path, curve) = bounds_to(ctx, &req, &pdir, "bound")?;
            entry["bound"] = json!(json_path);
            if let Ok(rep) = compare(&ens, &curve) {
                entry["pass"] = json!(rep.pass);
                entry["min_margin"] = json!(rep.min_margin());
            }
        }
        ctx.say(format!("{name}: {} mean regret {mean:.4}", Value::Object(settings)));
        index.push(entry);
    }
    let idx = dir.join("index.json");
    write(
        &idx,
        &serde_json::to_string_pretty(&json!({ "points": index })).expect("serializable"),
    )?;
    ctx.say(format!("wrote {} ({} points)", idx.display(), points.len()));
    Ok(0)
}
