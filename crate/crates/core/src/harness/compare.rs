use serde::{Deserialize, Serialize};

use crate::bounds::BoundCurve;
use crate::scalar::ExtReal;

use super::ensemble::RegretEnsemble;
use super::stats::empirical_quantile;
use super::HarnessError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationRow {
    pub delta: f64,
    pub quantile: f64,
    /// Upper band edge, the side compared against the bound.
    pub upper: f64,
    pub bound: ExtReal,
    /// `bound / upper`; infinite for a vacuous bound or a zero edge.
    pub margin: f64,
    pub violated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub name: String,
    pub horizon: u64,
    pub replications: usize,
    pub rows: Vec<ViolationRow>,
    /// Bound points with `delta < 1/R`, which the ensemble cannot resolve.
    pub skipped: usize,
    pub pass: bool,
}

impl ViolationReport {
    pub fn min_margin(&self) -> f64 {
        self.rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn table(&self) -> String {
        let mut out = format!(
            "{} at horizon {} over {} replications ({} points below resolution skipped)\n{:>12} {:>14} {:>14} {:>14} {:>10}  status\n",
            self.name, self.horizon, self.replications, self.skipped, "delta", "quantile", "upper edge", "bound", "margin"
        );
        for r in &self.rows {
            let bound = match r.bound {
                ExtReal::Finite(b) => format!("{b:.6}"),
                ExtReal::Infinite => "inf".into(),
            };
            out.push_str(&format!(
                "{:>12.6e} {:>14.6} {:>14.6} {:>14} {:>10.3}  {}\n",
                r.delta,
                r.quantile,
                r.upper,
                bound,
                r.margin,
                if r.violated { "VIOLATED" } else { "ok" }
            ));
        }
        out.push_str(if self.pass { "pass\n" } else { "FAIL\n" });
        out
    }
}

/// Checks the upper band edge of every resolvable empirical quantile at the
/// final checkpoint against the bound curve.
///
/// A `fixture_hash` string in the curve parameters must match the ensemble's.
pub fn compare(ens: &RegretEnsemble, curve: &BoundCurve) -> Result<ViolationReport, HarnessError> {
    if curve.horizon != ens.horizon() {
        return Err(HarnessError::Provenance(format!(
            "bound is for horizon {}, ensemble for {}",
            curve.horizon,
            ens.horizon()
        )));
    }
    if let Some(h) = curve.parameters.get("fixture_hash").and_then(|v| v.as_str()) {
        if h != ens.fixture_hash {
            return Err(HarnessError::Provenance(format!(
                "fixture hash {h} does not match ensemble {}",
                ens.fixture_hash
            )));
        }
    }
    let r = ens.replications();
    let mut rows = Vec::new();
    let mut skipped = 0;
    for p in &curve.points {
        if p.delta * (r as f64) < 1.0 - 1e-9 {
            skipped += 1;
            continue;
        }
        let q = empirical_quantile(ens, p.delta, ens.last())?;
        let (violated, margin) = match p.total {
            ExtReal::Infinite => (false, f64::INFINITY),
            ExtReal::Finite(b) => (q.upper > b, if q.upper > 0.0 { b / q.upper } else { f64::INFINITY }),
        };
        rows.push(ViolationRow {
            delta: p.delta,
            quantile: q.value,
            upper: q.upper,
            bound: p.total,
            margin,
            violated,
        });
    }
    if rows.is_empty() {
        return Err(HarnessError::ResolutionMismatch { replications: r });
    }
    let pass = rows.iter().all(|row| !row.violated);
    Ok(ViolationReport {
        name: curve.name.clone(),
        horizon: curve.horizon,
        replications: r,
        rows,
        skipped,
        pass,
    })
}
