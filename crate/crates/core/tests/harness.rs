use eqo_core::harness::{
    band_ranks, compare, empirical_mean, empirical_quantile, quantile_rank, run_ensemble, BoundRequest,
    ExperimentConfig, HarnessError, RegretEnsemble,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(text).unwrap()
}

fn synthetic(column: Vec<f64>) -> RegretEnsemble {
    RegretEnsemble {
        checkpoints: vec![1],
        seeds: (0..column.len() as u64).collect(),
        regret: column.into_iter().map(|x| vec![x]).collect(),
        config_hash: String::new(),
        fixture_hash: String::new(),
    }
}

// Binomial cdf by direct summation in log space.
fn binom_cdf(k: i64, n: usize, p: f64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let mut ln_fact = vec![0.0f64; n + 1];
    for i in 1..=n {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    (0..=(k as usize).min(n))
        .map(|i| (ln_fact[n] - ln_fact[i] - ln_fact[n - i] + i as f64 * p.ln() + (n - i) as f64 * (1.0 - p).ln()).exp())
        .sum()
}

#[test]
fn band_ranks_match_exact_binomial() {
    for (r, delta) in [(100usize, 0.1), (100, 0.5), (1000, 0.05), (10_000, 0.01)] {
        let p = 1.0 - delta;
        let (l, u) = band_ranks(delta, r);
        // Upper edge: at most U - 1 samples below the quantile with prob >= 0.975, and U is minimal.
        assert!(binom_cdf(u as i64 - 1, r, p) >= 0.975 - 1e-9);
        assert!(u == 1 || binom_cdf(u as i64 - 2, r, p) < 0.975);
        // Lower edge: at least L samples at or below with prob >= 0.975, and L is maximal.
        assert!(1.0 - binom_cdf(l as i64 - 1, r, p) >= 0.975 - 1e-9);
        assert!(l == r || 1.0 - binom_cdf(l as i64, r, p) < 0.975);
        assert!(l <= quantile_rank(delta, r) && quantile_rank(delta, r) <= u);
    }
}

#[test]
fn band_covers_true_quantile() {
    let (r, delta, trials) = (100, 0.1, 20_000);
    let q = 1.0 - delta;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut covered = 0;
    for _ in 0..trials {
        let ens = synthetic((0..r).map(|_| rng.random::<f64>()).collect());
        let est = empirical_quantile(&ens, delta, 0).unwrap();
        if est.lower <= q && q <= est.upper {
            covered += 1;
        }
    }
    let rate = covered as f64 / trials as f64;
    let se = (0.05 * 0.95 / trials as f64).sqrt();
    assert!(rate >= 0.95 - 3.0 * se, "coverage {rate}");
}

#[test]
fn quantiles_reproduce_the_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let r = 500;
    let col: Vec<f64> = (0..r).map(|_| Exp::new(0.5).unwrap().sample(&mut rng)).collect();
    let max = col.iter().cloned().fold(f64::MIN, f64::max);
    let ens = synthetic(col);
    // ranks R-1, ..., 1 from delta = j/R, plus the maximum.
    let sum: f64 = (1..r)
        .map(|j| empirical_quantile(&ens, j as f64 / r as f64, 0).unwrap().value)
        .sum::<f64>()
        + max;
    let (mean, _) = empirical_mean(&ens, 0);
    assert!((sum / r as f64 - mean).abs() <= 1e-12 * mean);
    assert_eq!(
        empirical_quantile(&ens, 0.5 / r as f64, 0),
        Err(HarnessError::DeltaBelowResolution {
            delta: 0.5 / r as f64,
            replications: r
        })
    );
}

#[test]
fn synthetic_mean_within_four_se() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ens = synthetic(
        (0..2000)
            .map(|_| Exp::new(1.0 / 3.0).unwrap().sample(&mut rng))
            .collect(),
    );
    let (mean, se) = empirical_mean(&ens, 0);
    assert!((mean - 3.0).abs() <= 4.0 * se, "{mean} +- {se}");
}

#[test]
fn worker_count_does_not_change_output() {
    let cfg = config(
        r#"{"mdp": {"fixture": "two-state"}, "schedule": {"schedule": "sqrt-growth", "params": {}},
            "horizon": 300, "replications": 4, "seed": 99}"#,
    );
    let a = run_ensemble(&cfg, 1, true).unwrap();
    let b = run_ensemble(&cfg, 4, true).unwrap();
    assert_eq!(a.ensemble.to_csv(), b.ensemble.to_csv());
    assert_eq!(a.traces, b.traces);
}

#[test]
fn trajectories_are_monotone_and_capped() {
    let cfg = config(
        r#"{"mdp": {"fixture": "two-state"}, "schedule": {"schedule": "eqo-plus-hoeffding", "params": {}},
            "horizon": 500, "replications": 6, "seed": 3}"#,
    );
    let ens = run_ensemble(&cfg, 1, false).unwrap().ensemble;
    for row in &ens.regret {
        assert!(row.windows(2).all(|w| w[1] >= w[0]));
        for (&x, &k) in row.iter().zip(&ens.checkpoints) {
            assert!((0.0..=k as f64).contains(&x));
        }
    }
}

#[test]
fn deterministic_chain_stops_regretting() {
    let cfg = config(
        r#"{"mdp": {"fixture": "deterministic-chain"}, "schedule": {"schedule": "constant-c1", "params": {"c1": 1e-6}},
            "horizon": 200, "replications": 3, "seed": 1}"#,
    );
    let ens = run_ensemble(&cfg, 1, false).unwrap().ensemble;
    let half = ens.checkpoint_index(100).unwrap();
    for row in &ens.regret {
        assert_eq!(row[half], row[ens.last()]);
    }
}

#[test]
fn small_bandit_run_passes_c1() {
    let cfg = config(
        r#"{"mdp": {"fixture": "two-arm-gaussian"}, "schedule": {"schedule": "constant-c1", "params": {}},
            "horizon": 300, "replications": 200, "seed": 4}"#,
    );
    let ens = run_ensemble(&cfg, 1, false).unwrap().ensemble;
    let req = BoundRequest::from_json(
        r#"{"mdp": {"fixture": "two-arm-gaussian"}, "horizon": 300, "bound": {"bound": "c1", "params": {}}}"#,
    )
    .unwrap();
    let report = compare(&ens, &req.evaluate().unwrap()).unwrap();
    assert!(report.pass, "{}", report.table());
    assert!(report.skipped > 0);
}
