use serde::{Deserialize, Serialize};

use crate::scalar::ExtReal;

use super::BoundError;

/// One bound evaluation with its additive components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint {
    pub delta: f64,
    pub total: ExtReal,
    pub components: Vec<(String, ExtReal)>,
}

impl BoundPoint {
    pub fn new(delta: f64, components: Vec<(&str, ExtReal)>) -> Self {
        let total = components.iter().fold(ExtReal::Finite(0.0), |acc, (_, v)| acc + *v);
        BoundPoint {
            delta,
            total,
            components: components.into_iter().map(|(n, v)| (n.to_string(), v)).collect(),
        }
    }

    pub fn component(&self, name: &str) -> Option<ExtReal> {
        self.components.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    /// An infinite total carries no information.
    pub fn is_vacuous(&self) -> bool {
        self.total.is_infinite()
    }
}

/// A bound evaluated over a grid of confidence levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub name: String,
    /// Horizon the curve was evaluated at (`K` episodes or `T` steps).
    pub horizon: u64,
    pub parameters: serde_json::Value,
    /// Ascending in `delta`.
    pub points: Vec<BoundPoint>,
}

impl BoundCurve {
    /// Evaluates `f` on `grid`, which is sorted ascending on return.
    pub fn evaluate(
        name: &str,
        horizon: u64,
        parameters: serde_json::Value,
        grid: &[f64],
        f: impl Fn(f64) -> Result<BoundPoint, BoundError>,
    ) -> Result<Self, BoundError> {
        let mut grid = grid.to_vec();
        grid.sort_by(f64::total_cmp);
        let points = grid.into_iter().map(f).collect::<Result<Vec<_>, _>>()?;
        Ok(BoundCurve {
            name: name.to_string(),
            horizon,
            parameters,
            points,
        })
    }

    pub fn is_vacuous(&self) -> bool {
        self.points.iter().any(BoundPoint::is_vacuous)
    }

    /// CSV with columns `delta,total,<component>...`; infinite values print as `inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,total");
        if let Some(p) = self.points.first() {
            for (name, _) in &p.components {
                out.push(',');
                out.push_str(name);
            }
        }
        out.push('\n');
        for p in &self.points {
            out.push_str(&format!("{:?},{}", p.delta, fmt_ext(p.total)));
            for (_, v) in &p.components {
                out.push(',');
                out.push_str(&fmt_ext(*v));
            }
            out.push('\n');
        }
        out
    }
}

fn fmt_ext(v: ExtReal) -> String {
    match v {
        ExtReal::Finite(x) => format!("{x:?}"),
        ExtReal::Infinite => "inf".to_string(),
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

pub const DEFAULT_GRID_POINTS: usize = 200;
pub const DEFAULT_GRID_MIN: f64 = 1e-8;

pub fn default_grid() -> Vec<f64> {
    log_grid(DEFAULT_GRID_POINTS, DEFAULT_GRID_MIN, 1.0)
}

/// `int_0^1 f(delta) d delta` with an error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: ExtReal,
    pub error_estimate: f64,
}

// Exact integral of a + b L over [d0, d1] where L = log(1/delta) and
// (a, b) interpolate (f0, f1) linearly in L. Uses d/d delta [delta (1 + L)] = L.
fn segment(d0: f64, f0: f64, d1: f64, f1: f64) -> f64 {
    let (l0, l1) = ((1.0 / d0).ln(), (1.0 / d1).ln());
    let b = (f1 - f0) / (l1 - l0);
    let a = f0 - b * l0;
    a * (d1 - d0) + b * (d1 * (1.0 + l1) - d0 * (1.0 + l0))
}

fn piecewise(points: &[(f64, f64)]) -> f64 {
    let body: f64 = points.windows(2).map(|w| segment(w[0].0, w[0].1, w[1].0, w[1].1)).sum();
    // Below the grid, extend the first segment's fit in L down to 0.
    let (d0, f0) = points[0];
    let tail = if points.len() > 1 {
        let (d1, f1) = points[1];
        let (l0, l1) = ((1.0 / d0).ln(), (1.0 / d1).ln());
        let b = (f1 - f0) / (l1 - l0);
        let a = f0 - b * l0;
        a * d0 + b * d0 * (1.0 + l0)
    } else {
        f0 * d0
    };
    body + tail
}

/// Expected-regret bound from a distributional one, integrating over `delta`.
///
/// The curve is treated as piecewise linear in `log(1/delta)`, which integrates
/// constants and `log(1/delta)` exactly. The error estimate is the difference to
/// the same rule on every other grid point.
pub fn expected_bound_via_integral(curve: &BoundCurve) -> Result<Integral, BoundError> {
    if curve.points.iter().any(|p| p.total.is_infinite()) {
        return Ok(Integral {
            value: ExtReal::Infinite,
            error_estimate: 0.0,
        });
    }
    let pts: Vec<(f64, f64)> = curve.points.iter().map(|p| (p.delta, p.total.to_float())).collect();
    if pts.len() < 3 || (pts.last().unwrap().0 - 1.0).abs() > 1e-12 {
        return Err(BoundError::GridTooCoarse {
            estimate: f64::INFINITY,
            value: f64::NAN,
        });
    }
    let fine = piecewise(&pts);
    let mut coarse_pts: Vec<(f64, f64)> = pts.iter().step_by(2).copied().collect();
    if coarse_pts.last() != pts.last() {
        coarse_pts.push(*pts.last().unwrap());
    }
    let coarse = piecewise(&coarse_pts);
    let estimate = (fine - coarse).abs();
    if estimate > 0.01 * fine.abs() {
        return Err(BoundError::GridTooCoarse { estimate, value: fine });
    }
    Ok(Integral {
        value: ExtReal::Finite(fine),
        error_estimate: estimate,
    })
}
