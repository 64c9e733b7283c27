use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::harness::derive_seed;

use super::certificate::bounded_subexp_cert;
use super::thresholds::{clipped_timeuniform_threshold, hoeffding_threshold, peeling_threshold, ville_threshold};
use super::ConcentrationError;

/// IID martingale-difference generators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Generator {
    Gaussian {
        sigma: f64,
    },
    /// Uniform on `[-c, c]`.
    BoundedUniform {
        c: f64,
    },
    /// `+-1` with equal probability.
    Rademacher,
    /// `E - 1/rate` with `E ~ Exp(rate)`.
    CenteredExponential {
        rate: f64,
    },
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::Gaussian { .. } => "gaussian",
            Generator::BoundedUniform { .. } => "bounded-uniform",
            Generator::Rademacher => "rademacher",
            Generator::CenteredExponential { .. } => "centered-exponential",
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Generator::Gaussian { sigma } => sigma * rng.sample::<f64, _>(StandardNormal),
            Generator::BoundedUniform { c } => c * (2.0 * rng.random::<f64>() - 1.0),
            Generator::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Generator::CenteredExponential { rate } => Exp::new(rate).expect("positive rate").sample(rng) - 1.0 / rate,
        }
    }

    /// `(sigma^2, alpha)` sub-exponential certificate.
    pub fn certificate(&self) -> (f64, f64) {
        match *self {
            Generator::Gaussian { sigma } => (sigma * sigma, 0.0),
            Generator::BoundedUniform { c } => bounded_subexp_cert(c, c * c / 3.0, c),
            Generator::Rademacher => bounded_subexp_cert(1.0, 1.0, 1.0),
            // log E e^{lX} = -l/r - log(1 - l/r) <= (l/r)^2 for |l/r| <= 1/2.
            Generator::CenteredExponential { rate } => (2.0 / (rate * rate), 2.0 / rate),
        }
    }

    /// Sub-Gaussian variance proxy, if the increments are sub-Gaussian.
    pub fn sub_gaussian(&self) -> Option<f64> {
        match *self {
            Generator::Gaussian { sigma } => Some(sigma * sigma),
            Generator::BoundedUniform { c } => Some(c * c),
            Generator::Rademacher => Some(1.0),
            Generator::CenteredExponential { .. } => None,
        }
    }
}

/// The four tested inequalities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma {
    /// Time-uniform sub-exponential bound on the sum.
    Ville,
    /// Fixed-`n` sub-Gaussian bound.
    Hoeffding,
    /// Time-uniform bound on the clipped mean.
    Clipped,
    /// Time-uniform unit sub-Gaussian bound with tight constant.
    Peeling,
}

impl Lemma {
    pub fn name(&self) -> &'static str {
        match self {
            Lemma::Ville => "ville",
            Lemma::Hoeffding => "hoeffding",
            Lemma::Clipped => "clipped",
            Lemma::Peeling => "peeling",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertConfig {
    pub replications: usize,
    pub n_max: usize,
    pub deltas: Vec<f64>,
    pub seed: u64,
    /// Sample size of the fixed-`n` test.
    pub hoeffding_n: usize,
    /// Clip level `c` of the clipped-mean test.
    pub clip: f64,
    pub eta: f64,
    /// Walk length at which the time-uniform `lambda` is tuned.
    pub lambda_n: usize,
}

impl Default for CertConfig {
    fn default() -> Self {
        CertConfig {
            replications: 100_000,
            n_max: 10_000,
            deltas: vec![0.1, 0.05, 0.01],
            seed: 0x5eed,
            hoeffding_n: 100,
            clip: 1.0,
            eta: 0.5,
            lambda_n: 100,
        }
    }
}

/// `delta + 3 sqrt(delta (1 - delta) / R)`.
pub fn violation_tolerance(delta: f64, replications: usize) -> f64 {
    delta + 3.0 * (delta * (1.0 - delta) / replications as f64).sqrt()
}

/// One cell of the certification matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertRow {
    pub lemma: Lemma,
    pub generator: Generator,
    pub params: String,
    pub delta: f64,
    pub violations: u64,
    pub replications: usize,
    pub rate: f64,
    pub band: f64,
    pub pass: bool,
}

impl CertRow {
    pub const CSV_HEADER: &'static str = "lemma,generator,params,delta,rate,band,pass";

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{:?},{:?},{:?},{}",
            self.lemma.name(),
            self.generator.name(),
            self.params,
            self.delta,
            self.rate,
            self.band,
            self.pass
        )
    }
}

// Per-step thresholds on the running sum S_n, indexed n - 1; infinity where
// the event cannot occur. `check_at` restricts the event to a single n.
struct Test {
    lemma: Lemma,
    delta: f64,
    params: String,
    sum_threshold: Vec<f64>,
    check_at: Option<usize>,
}

fn build_tests(gen: &Generator, cfg: &CertConfig, lemmas: &[Lemma]) -> Result<Vec<Test>, ConcentrationError> {
    let (sigma2, alpha) = gen.certificate();
    let mut tests = Vec::new();
    for &lemma in lemmas {
        for &delta in &cfg.deltas {
            let (params, thr, check_at) = match lemma {
                Lemma::Ville => {
                    let tuned = (2.0 * (1.0 / delta).ln() / (sigma2 * cfg.lambda_n as f64)).sqrt();
                    let lambda = if alpha > 0.0 { tuned.min(1.0 / alpha) } else { tuned };
                    let thr = (1..=cfg.n_max)
                        .map(|n| ville_threshold(lambda, alpha, sigma2 * n as f64, delta))
                        .collect::<Result<Vec<_>, _>>()?;
                    (
                        format!("lambda={lambda:.6};sigma2={sigma2:.6};alpha={alpha}"),
                        thr,
                        None,
                    )
                }
                Lemma::Hoeffding => {
                    let proxy = gen
                        .sub_gaussian()
                        .ok_or(ConcentrationError::NotSubGaussian(gen.name()))?;
                    let n = cfg.hoeffding_n;
                    let mut thr = vec![f64::INFINITY; n];
                    thr[n - 1] = hoeffding_threshold(n as u64, proxy.sqrt(), delta)?;
                    (format!("n={n};sigma={:.6}", proxy.sqrt()), thr, Some(n))
                }
                Lemma::Clipped => {
                    let sigma = sigma2.sqrt();
                    let thr = (1..=cfg.n_max)
                        .map(|n| {
                            clipped_timeuniform_threshold(n as u64, sigma, alpha, cfg.clip, delta).map(|t| {
                                if t > cfg.clip {
                                    f64::INFINITY
                                } else {
                                    t * n as f64
                                }
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    (format!("c={};sigma={sigma:.6};alpha={alpha}", cfg.clip), thr, None)
                }
                Lemma::Peeling => {
                    let proxy = gen
                        .sub_gaussian()
                        .ok_or(ConcentrationError::NotSubGaussian(gen.name()))?;
                    if proxy > 1.0 {
                        return Err(ConcentrationError::NotSubGaussian(gen.name()));
                    }
                    let thr = (1..=cfg.n_max)
                        .map(|n| peeling_threshold(n as u64, cfg.eta, delta))
                        .collect::<Result<Vec<_>, _>>()?;
                    (format!("eta={}", cfg.eta), thr, None)
                }
            };
            tests.push(Test {
                lemma,
                delta,
                params,
                sum_threshold: thr,
                check_at,
            });
        }
    }
    Ok(tests)
}

/// Runs `lemmas` against walks from `gen`; every lemma sees the same walks.
pub fn certify(
    gen: Generator,
    lemmas: &[Lemma],
    cfg: &CertConfig,
    stream: u64,
) -> Result<Vec<CertRow>, ConcentrationError> {
    let tests = build_tests(&gen, cfg, lemmas)?;
    assert!(tests.len() <= 64, "at most 64 lemma/delta cells per generator");
    let walk_len = tests.iter().map(|t| t.check_at.unwrap_or(cfg.n_max)).max().unwrap_or(0);
    // Smallest threshold at each n across all tests, to skip the per-test loop.
    let floor: Vec<f64> = (0..walk_len)
        .map(|i| {
            tests
                .iter()
                .map(|t| t.sum_threshold.get(i).copied().unwrap_or(f64::INFINITY))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let all = if tests.len() == 64 {
        u64::MAX
    } else {
        (1u64 << tests.len()) - 1
    };
    let base = derive_seed(cfg.seed, stream);
    let masks: Vec<u64> = (0..cfg.replications)
        .into_par_iter()
        .map(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(base, j as u64));
            let mut hit = 0u64;
            let mut s = 0.0;
            for i in 0..walk_len {
                s += gen.sample(&mut rng);
                if s < floor[i] {
                    continue;
                }
                for (b, t) in tests.iter().enumerate() {
                    if s >= t.sum_threshold.get(i).copied().unwrap_or(f64::INFINITY) {
                        hit |= 1 << b;
                    }
                }
                if hit == all {
                    break;
                }
            }
            hit
        })
        .collect();
    Ok(tests
        .iter()
        .enumerate()
        .map(|(b, t)| {
            let violations = masks.iter().filter(|&&m| m & (1 << b) != 0).count() as u64;
            let rate = violations as f64 / cfg.replications as f64;
            let band = violation_tolerance(t.delta, cfg.replications);
            CertRow {
                lemma: t.lemma,
                generator: gen,
                params: t.params.clone(),
                delta: t.delta,
                violations,
                replications: cfg.replications,
                rate,
                band,
                pass: rate <= band,
            }
        })
        .collect())
}

/// The full matrix: sub-exponential lemmas on gaussian, uniform and centred
/// exponential walks; sub-Gaussian lemmas on gaussian, uniform and Rademacher walks.
pub fn certification_matrix(cfg: &CertConfig) -> Result<Vec<CertRow>, ConcentrationError> {
    let plan = [
        (
            Generator::Gaussian { sigma: 1.0 },
            &[Lemma::Ville, Lemma::Hoeffding, Lemma::Clipped, Lemma::Peeling][..],
        ),
        (
            Generator::BoundedUniform { c: 1.0 },
            &[Lemma::Ville, Lemma::Hoeffding, Lemma::Clipped, Lemma::Peeling][..],
        ),
        (Generator::Rademacher, &[Lemma::Hoeffding, Lemma::Peeling][..]),
        (
            Generator::CenteredExponential { rate: 1.0 },
            &[Lemma::Ville, Lemma::Clipped][..],
        ),
    ];
    let mut rows = Vec::new();
    for (i, (gen, lemmas)) in plan.iter().enumerate() {
        rows.extend(certify(*gen, lemmas, cfg, i as u64)?);
    }
    Ok(rows)
}
