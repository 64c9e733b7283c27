use serde::{Deserialize, Serialize};

use crate::agent::{BonusSchedule, HoeffdingParams, PowerParams, ScheduleContext, ScheduleSpec, SqrtGrowthParams};
use crate::bounds::{
    cor1, cor2, cor3_instance, cor3_worst_case, log_grid, thm_b1, thm_c1, thm_c1_special, thm_c2, thm_e1, BoundCurve,
    C1Form, Cor2Params, Cor3Params, DeltaRule, GapInput, GapVariant, LogFactors, LogForm, ProxyConstants, RlInput,
    DEFAULT_GRID_MIN, DEFAULT_GRID_POINTS,
};
use crate::mdp::{effective_gap, optimal_values, variance_proxy, GapChoice, GaussianWRule, MdpSpec, ProxyMode};
use crate::ValueTables;

use super::config::{fixture_hash, noise_level, MdpRef, OutputConfig};
use super::HarnessError;

fn one() -> f64 {
    1.0
}

/// Which bound to evaluate, with its schedule constants:
/// `{"bound": "<name>", "params": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "bound", content = "params", rename_all = "kebab-case")]
pub enum BoundSpec {
    /// Bandit, constant `c1`; without `c1`, `c1 = scale sigma sqrt(T/A)`.
    C1 {
        #[serde(default)]
        c1: Option<f64>,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        form: C1Form,
        #[serde(default)]
        sigma: Option<f64>,
    },
    /// Bandit, `c1 = sigma sqrt(T/A)` in closed form.
    C1Special {
        #[serde(default)]
        sigma: Option<f64>,
    },
    /// Bandit, `c2,t = u(t, delta_t)`.
    C2 {
        delta_rule: DeltaRule,
        #[serde(default)]
        sigma: Option<f64>,
    },
    /// Worst-case RL bound for any schedule.
    B1 { schedule: ScheduleSpec },
    /// Gap-dependent RL bound for any schedule.
    E1 {
        schedule: ScheduleSpec,
        #[serde(default)]
        variant: GapVariant,
        #[serde(default)]
        gap_choice: GapChoice,
    },
    /// Sqrt-growth schedule with `c2 = inf`.
    Cor1 { c1: f64 },
    /// Sqrt-growth plus Hoeffding schedule.
    Cor2 {
        #[serde(flatten)]
        params: Cor2Params,
    },
    Cor3WorstCase {
        #[serde(flatten)]
        params: Cor3Params,
    },
    Cor3Instance {
        #[serde(flatten)]
        params: Cor3Params,
    },
}

impl BoundSpec {
    pub fn name(&self) -> &'static str {
        match self {
            BoundSpec::C1 { .. } => "c1",
            BoundSpec::C1Special { .. } => "c1-special",
            BoundSpec::C2 { .. } => "c2",
            BoundSpec::B1 { .. } => "b1",
            BoundSpec::E1 { .. } => "e1",
            BoundSpec::Cor1 { .. } => "cor1",
            BoundSpec::Cor2 { .. } => "cor2",
            BoundSpec::Cor3WorstCase { .. } => "cor3-worst-case",
            BoundSpec::Cor3Instance { .. } => "cor3-instance",
        }
    }

    fn is_bandit(&self) -> bool {
        matches!(
            self,
            BoundSpec::C1 { .. } | BoundSpec::C1Special { .. } | BoundSpec::C2 { .. }
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub points: usize,
    pub min: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            points: DEFAULT_GRID_POINTS,
            min: DEFAULT_GRID_MIN,
        }
    }
}

/// A bound curve to evaluate on an instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundRequest {
    pub mdp: MdpRef,
    /// `K` episodes, or `T` steps for bandit bounds.
    pub horizon: u64,
    pub bound: BoundSpec,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub proxy_mode: ProxyMode,
    #[serde(default)]
    pub gaussian_w: GaussianWRule,
    #[serde(default)]
    pub log_form: LogForm,
    #[serde(default)]
    pub output: OutputConfig,
}

fn bandit_gaps(mdp: &MdpSpec) -> Vec<f64> {
    let means: Vec<f64> = (0..mdp.actions()).map(|a| mdp.mean_reward(0, 0, a)).collect();
    let best = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    means.iter().map(|m| best - m).collect()
}

fn sigma_of(explicit: Option<f64>, mdp: &MdpSpec) -> Result<f64, HarnessError> {
    explicit.or_else(|| noise_level(mdp)).ok_or_else(|| {
        HarnessError::Config("bandit bound needs sigma: the instance has no sub-Gaussian noise level".into())
    })
}

impl BoundRequest {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let r: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        if r.horizon == 0 {
            return Err(HarnessError::Config("horizon must be at least 1".into()));
        }
        if !(r.grid.points >= 3 && r.grid.min > 0.0 && r.grid.min < 1.0) {
            return Err(HarnessError::Config(
                "grid needs at least 3 points and 0 < min < 1".into(),
            ));
        }
        Ok(r)
    }

    pub fn grid(&self) -> Vec<f64> {
        log_grid(self.grid.points, self.grid.min, 1.0)
    }

    /// Schedule whose coefficients the RL bound is evaluated on.
    fn schedule_spec(&self, consts: &ProxyConstants) -> Option<ScheduleSpec> {
        let (w_diff, v_alpha) = (Some(consts.w_diff), Some(consts.v_alpha));
        match &self.bound {
            BoundSpec::B1 { schedule } | BoundSpec::E1 { schedule, .. } => Some(schedule.clone()),
            BoundSpec::Cor1 { c1 } => Some(ScheduleSpec::SqrtGrowth(SqrtGrowthParams {
                c1: *c1,
                known_k: false,
                w_diff,
                v_alpha,
            })),
            BoundSpec::Cor2 { params } => Some(ScheduleSpec::EqoPlusHoeffding(HoeffdingParams {
                c1: params.c1,
                c2: params.c2,
                known_k: false,
                w_diff,
                v_alpha,
            })),
            BoundSpec::Cor3WorstCase { params } | BoundSpec::Cor3Instance { params } => {
                Some(ScheduleSpec::Power(PowerParams {
                    c1: params.c1,
                    c2: params.c2,
                    alpha: params.alpha,
                    beta: params.beta,
                }))
            }
            _ => None,
        }
    }

    /// Evaluates the bound over the grid. The curve parameters record the
    /// request, the instance constants and the instance hash.
    pub fn evaluate(&self) -> Result<BoundCurve, HarnessError> {
        let mdp = self.mdp.load()?;
        let grid = self.grid();
        let t = self.horizon;
        let mut params = serde_json::json!({
            "request": { "bound": &self.bound, "horizon": t, "log_form": self.log_form },
            "fixture_hash": fixture_hash(&mdp),
        });
        let name = self.bound.name();
        if self.bound.is_bandit() {
            if !mdp.is_bandit() {
                return Err(HarnessError::Config(format!(
                    "{name} is a bandit bound; the instance has S, H > 1"
                )));
            }
            let gaps = bandit_gaps(&mdp);
            let a = mdp.actions() as f64;
            let curve = match &self.bound {
                BoundSpec::C1 { c1, scale, form, sigma } => {
                    let s = sigma_of(*sigma, &mdp)?;
                    let c1 = c1.unwrap_or(scale * s * (t as f64 / a).sqrt());
                    params["c1"] = c1.into();
                    params["sigma"] = s.into();
                    BoundCurve::evaluate(name, t, params, &grid, |d| thm_c1(t, d, c1, s, &gaps, *form))
                }
                BoundSpec::C1Special { sigma } => {
                    let s = sigma_of(*sigma, &mdp)?;
                    params["sigma"] = s.into();
                    BoundCurve::evaluate(name, t, params, &grid, |d| thm_c1_special(t, d, s, &gaps))
                }
                BoundSpec::C2 { delta_rule, sigma } => {
                    delta_rule.validate()?;
                    let s = sigma_of(*sigma, &mdp)?;
                    params["sigma"] = s.into();
                    BoundCurve::evaluate(name, t, params, &grid, |d| thm_c2(t, d, *delta_rule, s, &gaps))
                }
                _ => unreachable!(),
            };
            return Ok(curve?);
        }

        let vt: ValueTables = optimal_values(&mdp);
        let proxies = variance_proxy(&mdp, &vt, self.proxy_mode, self.gaussian_w)?;
        let consts = ProxyConstants::from_tables(mdp.v_max(), &proxies);
        params["constants"] = serde_json::to_value(consts).expect("serializable");
        let spec = self.schedule_spec(&consts).expect("RL bound");
        let ctx = ScheduleContext {
            states: mdp.states(),
            actions: mdp.actions(),
            horizon: mdp.horizon(),
            v_max: mdp.v_max(),
            k_max: t,
            sigma: noise_level(&mdp),
        };
        let schedule = BonusSchedule::build(&spec, ctx)?;
        let input = RlInput {
            logs: LogFactors::new(mdp.horizon(), mdp.states(), mdp.actions()).with_form(self.log_form),
            consts,
            schedule: &schedule,
        };

        let choice = match &self.bound {
            BoundSpec::E1 { gap_choice, .. } => *gap_choice,
            _ => GapChoice::default(),
        };
        let variant = match &self.bound {
            BoundSpec::E1 { variant, .. } => *variant,
            _ => GapVariant::Formal,
        };
        let eff = effective_gap(&mdp, &vt, choice)?;
        let raw: Vec<Vec<f64>> = (0..mdp.states())
            .map(|s| {
                (0..mdp.actions())
                    .map(|a| {
                        (0..mdp.horizon())
                            .map(|h| vt.gap[h][s][a])
                            .fold(f64::INFINITY, f64::min)
                    })
                    .collect()
            })
            .collect();
        let gaps = match (variant, &eff) {
            (_, None) => None,
            (GapVariant::Formal, Some(e)) => Some(GapInput {
                per_pair: &e.per_pair,
                floor: e.v_gap,
            }),
            (GapVariant::MainText, Some(_)) => Some(GapInput {
                per_pair: &raw,
                floor: vt.gap_min.expect("some gap is positive"),
            }),
        };

        let curve = match &self.bound {
            BoundSpec::B1 { .. } => BoundCurve::evaluate(name, t, params, &grid, |d| thm_b1(&input, t, d)),
            BoundSpec::E1 { .. } => {
                BoundCurve::evaluate(name, t, params, &grid, |d| thm_e1(&input, t, d, gaps, variant))
            }
            BoundSpec::Cor1 { c1 } => BoundCurve::evaluate(name, t, params, &grid, |d| cor1(&input, *c1, t, d)),
            BoundSpec::Cor2 { params: p } => {
                BoundCurve::evaluate(name, t, params, &grid, |d| cor2(&input, *p, t, d, gaps))
            }
            BoundSpec::Cor3WorstCase { params: p } => {
                BoundCurve::evaluate(name, t, params, &grid, |d| cor3_worst_case(&input, *p, t, d))
            }
            BoundSpec::Cor3Instance { params: p } => {
                BoundCurve::evaluate(name, t, params, &grid, |d| cor3_instance(&input, *p, t, d, gaps))
            }
            _ => unreachable!(),
        };
        Ok(curve?)
    }
}
