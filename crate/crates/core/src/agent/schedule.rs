use serde::{Deserialize, Serialize};

use crate::bounds::{tight_ucb, CoefficientSequence, DeltaRule, LambdaIotaBuilder, LogFactors};
use crate::scalar::ExtReal;

use super::AgentError;

/// Named schedule with its parameters, as read from config:
/// `{"schedule": "<name>", "params": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "schedule", content = "params", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScheduleSpec {
    ConstantC1(ConstantC1Params),
    TightUcbC2(TightUcbParams),
    SqrtGrowth(SqrtGrowthParams),
    EqoPlusHoeffding(HoeffdingParams),
    Power(PowerParams),
}

fn one() -> f64 {
    1.0
}

// Minimiser of 36/c1 + 16 c1.
fn default_growth_c1() -> f64 {
    1.5
}

fn default_c2() -> f64 {
    2.0
}

/// `c1,t = c1`, `c2,t = inf`. Without `c1`, `c1 = scale * sigma sqrt(T/A)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantC1Params {
    #[serde(default)]
    pub c1: Option<f64>,
    #[serde(default = "one")]
    pub scale: f64,
}

/// `c1,t = inf`, `c2,t = u(t, delta_t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TightUcbParams {
    pub delta_rule: DeltaRule,
    #[serde(default)]
    pub sigma: Option<f64>,
}

/// `c1,k = c1 V_max sqrt(k l1(iota_k, 1) / (SA log kH))`, `c2 = inf`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqrtGrowthParams {
    #[serde(default = "default_growth_c1")]
    pub c1: f64,
    /// Use `K` in place of `k` outside `iota_k`.
    #[serde(default)]
    pub known_k: bool,
    /// `W*_diff` for the `iota` construction; `2 V_max^2` if absent.
    #[serde(default)]
    pub w_diff: Option<f64>,
    /// `V_alpha` for the `iota` construction; `2 V_max` if absent.
    #[serde(default)]
    pub v_alpha: Option<f64>,
}

impl Default for SqrtGrowthParams {
    fn default() -> Self {
        SqrtGrowthParams {
            c1: default_growth_c1(),
            known_k: false,
            w_diff: None,
            v_alpha: None,
        }
    }
}

/// Sqrt-growth `c1,k` with `c2,k = c2 V_max sqrt(log 32HSAk)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoeffdingParams {
    #[serde(default = "default_growth_c1")]
    pub c1: f64,
    #[serde(default = "default_c2")]
    pub c2: f64,
    #[serde(default)]
    pub known_k: bool,
    #[serde(default)]
    pub w_diff: Option<f64>,
    #[serde(default)]
    pub v_alpha: Option<f64>,
}

/// `c1,k = c1 V_max (k/SA)^alpha`, `c2,k = c2 sqrt(k^beta)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerParams {
    pub c1: f64,
    pub c2: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Instance dimensions a schedule is built for.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleContext {
    pub states: usize,
    pub actions: usize,
    pub horizon: usize,
    pub v_max: f64,
    /// Largest episode (or step) index the schedule will be asked about.
    pub k_max: u64,
    /// Reward noise level, used by bandit schedules that leave `sigma` unset.
    pub sigma: Option<f64>,
}

impl ScheduleContext {
    fn logs(&self) -> LogFactors {
        LogFactors::new(self.horizon, self.states, self.actions)
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Constant(f64),
    TightUcb {
        rule: DeltaRule,
        sigma: f64,
        actions: usize,
    },
    Table {
        c1: Vec<f64>,
        iota: Vec<u32>,
        c2: Option<(f64, f64)>,
    },
    Power {
        c1: f64,
        c2: f64,
        alpha: f64,
        beta: f64,
        sa: f64,
    },
}

/// A constructed schedule answering `c1_at(k)` and `c2_at(k)`.
#[derive(Clone, Debug)]
pub struct BonusSchedule {
    spec: ScheduleSpec,
    ctx: ScheduleContext,
    kind: Kind,
}

fn positive(name: &str, x: f64) -> Result<f64, AgentError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(AgentError::NonPositiveConstant(format!("{name} = {x}")))
    }
}

// c1 V sqrt(k l1(i, 1) / (SA max(log kH, 1))).
fn growth_value(c1: f64, ctx: &ScheduleContext, logs: &LogFactors, k: u64, i: u32) -> f64 {
    let kk = k as f64;
    let denom = logs.sa() * logs.log_kh(k).max(1.0);
    c1 * ctx.v_max * (kk * logs.ell1(i as u64, 1.0) / denom).sqrt()
}

/// Builds `c1,k` for `k = 1..=k_max` together with its own `iota_k` at `delta = 1`.
///
/// `iota_k` depends on `c1,k` and vice versa. Each value is first evaluated with
/// the current interval; if it would open a new one it is re-evaluated with the
/// new interval index, which only increases it, so it still opens that interval.
fn sqrt_growth_table(
    c1: f64,
    known_k: bool,
    w_diff: f64,
    v_alpha: f64,
    ctx: &ScheduleContext,
) -> Result<(Vec<f64>, Vec<u32>), AgentError> {
    let logs = ctx.logs();
    let mut builder = LambdaIotaBuilder::new(logs, 1.0, w_diff, v_alpha);
    let mut values = Vec::with_capacity(ctx.k_max as usize);
    let mut iota = Vec::with_capacity(ctx.k_max as usize);
    for k in 1..=ctx.k_max {
        let kk = if known_k { ctx.k_max } else { k };
        let mut i = builder.current();
        let mut c = growth_value(c1, ctx, &logs, kk, i);
        if builder.would_open(c) {
            i = builder.lambdas().len() as u32 + 1;
            c = growth_value(c1, ctx, &logs, kk, i);
        }
        let got = builder.push(ExtReal::Finite(c))?;
        debug_assert!(got == i || c < builder.threshold());
        values.push(c);
        iota.push(got);
    }
    Ok((values, iota))
}

impl BonusSchedule {
    pub fn build(spec: &ScheduleSpec, ctx: ScheduleContext) -> Result<Self, AgentError> {
        positive("v_max", ctx.v_max)?;
        let kind = match spec {
            ScheduleSpec::ConstantC1(p) => {
                let c1 = match p.c1 {
                    Some(c) => c,
                    None => {
                        let sigma = ctx.sigma.ok_or_else(|| {
                            AgentError::MissingParameter("constant-c1 needs c1 or a noise level".into())
                        })?;
                        p.scale * sigma * (ctx.k_max as f64 / ctx.actions as f64).sqrt()
                    }
                };
                Kind::Constant(positive("c1", c1)?)
            }
            ScheduleSpec::TightUcbC2(p) => {
                p.delta_rule.validate()?;
                let sigma = p
                    .sigma
                    .or(ctx.sigma)
                    .ok_or_else(|| AgentError::MissingParameter("tight-ucb-c2 needs sigma".into()))?;
                Kind::TightUcb {
                    rule: p.delta_rule,
                    sigma: positive("sigma", sigma)?,
                    actions: ctx.actions,
                }
            }
            ScheduleSpec::SqrtGrowth(p) => {
                let (w, v) = (
                    p.w_diff.unwrap_or(2.0 * ctx.v_max * ctx.v_max),
                    p.v_alpha.unwrap_or(2.0 * ctx.v_max),
                );
                let (c1, iota) = sqrt_growth_table(positive("c1", p.c1)?, p.known_k, w, v, &ctx)?;
                Kind::Table { c1, iota, c2: None }
            }
            ScheduleSpec::EqoPlusHoeffding(p) => {
                if !(p.c2 >= 2.0) {
                    return Err(AgentError::NonPositiveConstant(format!(
                        "c2 >= 2 required, got {}",
                        p.c2
                    )));
                }
                let (w, v) = (
                    p.w_diff.unwrap_or(2.0 * ctx.v_max * ctx.v_max),
                    p.v_alpha.unwrap_or(2.0 * ctx.v_max),
                );
                let (c1, iota) = sqrt_growth_table(positive("c1", p.c1)?, p.known_k, w, v, &ctx)?;
                Kind::Table {
                    c1,
                    iota,
                    c2: Some((p.c2, ctx.logs().base())),
                }
            }
            ScheduleSpec::Power(p) => {
                if !(0.5..=1.0).contains(&p.alpha) {
                    return Err(AgentError::InvalidExponents(format!(
                        "α ∈ [½,1] required, got α = {}",
                        p.alpha
                    )));
                }
                if !(p.beta > 0.0 && p.beta <= p.alpha) {
                    return Err(AgentError::InvalidExponents(format!(
                        "0 < β ≤ α required, got β = {}",
                        p.beta
                    )));
                }
                Kind::Power {
                    c1: positive("c1", p.c1)?,
                    c2: positive("c2", p.c2)?,
                    alpha: p.alpha,
                    beta: p.beta,
                    sa: (ctx.states * ctx.actions) as f64,
                }
            }
        };
        Ok(BonusSchedule {
            spec: spec.clone(),
            ctx,
            kind,
        })
    }

    pub fn spec(&self) -> &ScheduleSpec {
        &self.spec
    }

    pub fn context(&self) -> &ScheduleContext {
        &self.ctx
    }

    pub fn name(&self) -> &'static str {
        match self.spec {
            ScheduleSpec::ConstantC1(_) => "constant-c1",
            ScheduleSpec::TightUcbC2(_) => "tight-ucb-c2",
            ScheduleSpec::SqrtGrowth(_) => "sqrt-growth",
            ScheduleSpec::EqoPlusHoeffding(_) => "eqo-plus-hoeffding",
            ScheduleSpec::Power(_) => "power",
        }
    }

    /// `iota_k` of the sqrt-growth construction, if this schedule has one.
    pub fn iota_at(&self, k: u64) -> Option<u32> {
        match &self.kind {
            Kind::Table { iota, .. } => Some(iota[self.index(k)]),
            _ => None,
        }
    }

    fn index(&self, k: u64) -> usize {
        assert!(
            k >= 1 && k <= self.ctx.k_max,
            "{} schedule is tabulated for 1 <= k <= {}, got {k}",
            self.name(),
            self.ctx.k_max
        );
        (k - 1) as usize
    }
}

impl CoefficientSequence for BonusSchedule {
    fn c1_at(&self, k: u64) -> ExtReal {
        match &self.kind {
            Kind::Constant(c) => ExtReal::Finite(*c),
            Kind::TightUcb { .. } => ExtReal::Infinite,
            Kind::Table { c1, .. } => ExtReal::Finite(c1[self.index(k)]),
            Kind::Power { c1, alpha, sa, .. } => ExtReal::Finite(c1 * self.ctx.v_max * (k as f64 / sa).powf(*alpha)),
        }
    }

    fn c2_at(&self, k: u64) -> ExtReal {
        match &self.kind {
            Kind::Constant(_) => ExtReal::Infinite,
            Kind::TightUcb { rule, sigma, actions } => {
                ExtReal::Finite(tight_ucb(k, rule.delta_at(k), *sigma, *actions))
            }
            Kind::Table { c2: None, .. } => ExtReal::Infinite,
            Kind::Table {
                c2: Some((c2, base)), ..
            } => ExtReal::Finite(c2 * self.ctx.v_max * (base * k as f64).ln().sqrt()),
            Kind::Power { c2, beta, .. } => ExtReal::Finite(c2 * (k as f64).powf(*beta).sqrt()),
        }
    }
}
