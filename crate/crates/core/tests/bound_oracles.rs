use eqo_core::agent::{BonusSchedule, ScheduleContext, ScheduleSpec, SqrtGrowthParams};
use eqo_core::bounds::{
    cor1, cor2, expected_bound_via_integral, kappa, kappa_gap, kappa_gap_reference, kappa_reference, lambda_iota,
    thm_b1, thm_c1, thm_c1_expected, thm_c1_special, thm_e1, tight_ucb, BoundCurve, BoundPoint, C1Form,
    CoefficientSequence, Cor2Params, DeltaRule, FnSequence, GapInput, GapVariant, LogFactors, ProxyConstants, RlInput,
};
use eqo_core::mdp::{fixtures, optimal_values, variance_proxy, GaussianWRule, ProxyMode};
use eqo_core::ExtReal;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

// Log factors written out again from their definitions.
fn ell1(h: usize, s: usize, a: usize, i: u64, delta: f64) -> f64 {
    (32.0 * (h * s * a) as f64 * (i * i) as f64 / delta).ln()
}

fn ell2(h: usize, s: usize, a: usize, k: u64, delta: f64) -> f64 {
    let inner = 2.0 + (k as f64 * h as f64).ln();
    (32.0 * (h * s * a) as f64 * inner * inner / delta).ln()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

fn total(p: &BoundPoint) -> f64 {
    p.total.to_float()
}

fn power(c1: f64, alpha: f64, c2: f64, beta: f64) -> impl CoefficientSequence {
    FnSequence(
        move |k: u64| ExtReal::Finite(c1 * (k as f64).powf(alpha)),
        move |k: u64| ExtReal::Finite(c2 * (k as f64).powf(beta / 2.0)),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lambda_sandwich_and_iota_cap(
        c1 in 0.1f64..50.0,
        alpha in 0.5f64..1.0,
        w_diff in 0.0f64..4.0,
        v_alpha in 0.0f64..4.0,
        di in 0usize..3,
    ) {
        let delta = [1.0, 0.1, 0.01][di];
        let (h, s, a) = (2, 2, 2);
        let logs = LogFactors::new(h, s, a);
        let c = |k: u64| c1 * (k as f64).powf(alpha);
        let li = lambda_iota(|k| ExtReal::Finite(c(k)), delta, w_diff, v_alpha, 5000, logs).unwrap();
        let l1_one = ell1(h, s, a, 1, delta);
        let thr = (2.0 * (13.0 * w_diff).sqrt()).max(2.0 * v_alpha) * l1_one;
        for k in 1..=5000u64 {
            let i = li.iota(k);
            prop_assert!(i as u64 <= k);
            prop_assert!(i as f64 <= 3.0 + (c(k) / c(1)).log2() + 1e-12);
            if c(k) < thr {
                continue;
            }
            let (lam, li_ell) = (li.lambda(i), ell1(h, s, a, i as u64, delta));
            prop_assert!(li_ell / lam + 13.0 * lam * w_diff * l1_one <= c(k), "lower side at k={}", k);
            prop_assert!(c(k) <= 4.0 * li_ell / lam, "upper side at k={}", k);
        }
    }

    #[test]
    fn kappa_scans_agree(
        c1 in 0.1f64..30.0,
        alpha in 0.5f64..1.0,
        c2 in 0.1f64..30.0,
        beta in 0.05f64..0.5,
        gap in 0.01f64..1.0,
        di in 0usize..3,
    ) {
        let delta = [1.0, 0.1, 0.01][di];
        let logs = LogFactors::new(2, 2, 2);
        let consts = ProxyConstants { v_max: 1.0, w_star: 2.0, w_diff: 2.0, v_alpha: 2.0, sigma_max: 2.0 };
        let seq = power(c1, alpha, c2, beta);
        let li = lambda_iota(|k| seq.c1_at(k), delta, consts.w_diff, consts.v_alpha, 3000, logs).unwrap();
        prop_assert_eq!(kappa(&seq, &consts, &li, &logs), kappa_reference(&seq, &consts, &li, &logs));
        prop_assert_eq!(
            kappa_gap(&seq, gap, consts.w_star, &li, &logs).unwrap(),
            kappa_gap_reference(&seq, gap, consts.w_star, &li, &logs).unwrap()
        );
    }

    #[test]
    fn tight_ucb_is_monotone(t in 1u64..1_000_000, d in 1e-12f64..1.0, arms in 1usize..10) {
        let looser = (1.5 * d).min(1.0);
        prop_assert!(tight_ucb(t, d, 1.0, arms) >= tight_ucb(t, looser, 1.0, arms));
        prop_assert!(tight_ucb(t, d, 2.0, arms) == 2.0 * tight_ucb(t, d, 1.0, arms));
        prop_assert!(tight_ucb(t, d, 1.0, arms + 1) > tight_ucb(t, d, 1.0, arms));
    }
}

#[test]
fn tau2_closed_form_matches_scan() {
    let rules = [
        DeltaRule::TLogT,
        DeltaRule::Power { p: 0.5 },
        DeltaRule::Power { p: 1.0 },
        DeltaRule::Power { p: 2.0 },
        DeltaRule::ExpPower { beta: 0.25 },
        DeltaRule::ExpPower { beta: 0.5 },
        DeltaRule::ExpPower { beta: 1.0 },
    ];
    let limit = 100_000;
    for rule in rules {
        for j in 0..40 {
            let delta = 10f64.powf(-0.25 * j as f64);
            let scan = rule.tau2_scan(delta, limit);
            if scan == limit {
                continue;
            }
            assert_eq!(rule.tau2(delta), scan, "{rule:?} at delta = {delta}");
        }
    }
}

#[test]
fn tight_ucb_ratio_limit() {
    let u = tight_ucb(1_000_000_000, 1e-300, 1.0, 1);
    let ratio = u / (2.0 * 1e300f64.ln()).sqrt();
    assert!((ratio - 1.0).abs() < 0.05, "ratio {ratio}");
    // At delta = 1e-9 the log log and additive terms still dominate.
    let u9 = tight_ucb(1_000_000_000, 1e-9, 1.0, 1);
    assert!(u9 / (2.0 * 1e9f64.ln()).sqrt() > 1.05);
}

#[test]
fn tight_ucb_is_time_uniform() {
    let (reps, n_max, delta) = (2000, 2000u64, 0.1);
    let radius: Vec<f64> = (1..=n_max)
        .map(|n| tight_ucb(n, delta, 1.0, 1) / (n as f64).sqrt())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut hits = 0;
    for _ in 0..reps {
        let mut sum = 0.0;
        for n in 1..=n_max {
            let x: f64 = StandardNormal.sample(&mut rng);
            sum += x;
            if sum / n as f64 + radius[(n - 1) as usize] < 0.0 {
                hits += 1;
                break;
            }
        }
    }
    let rate = hits as f64 / reps as f64;
    assert!(rate <= delta + 3.0 * (delta / reps as f64).sqrt(), "rate {rate}");
}

#[test]
fn c1_worked_example() {
    let p = thm_c1(200, 0.1, 10.0, 1.0, &[0.0, 0.3], C1Form::Formal).unwrap();
    let l = 40f64.ln();
    let expect = 10.0 * l + 10.0 + 2.0 * (400.0 * l).sqrt() + 0.3;
    assert!(rel_close(total(&p), expect, 1e-12));
    let s = thm_c1(200, 0.1, 10.0, 1.0, &[0.0, 0.3], C1Form::Simplified).unwrap();
    assert!(rel_close(total(&s), 20.0 * l + 30.0 + 0.3, 1e-12));
}

#[test]
fn c1_special_form() {
    let gaps = [0.0, 0.3, 0.7];
    for (t, sigma) in [(100u64, 1.0), (2000, 0.5), (50_000, 3.0)] {
        let root = sigma * (3.0 * t as f64).sqrt();
        for delta in [1.0, 0.5, 0.1, 1e-3, 1e-8] {
            let lg = (1.0f64 / delta).ln();
            let expect = 0.5 * root * (4f64.ln() + 2.0 + lg) + root * (4f64.ln() + lg).sqrt() + 1.0;
            let got = total(&thm_c1_special(t, delta, sigma, &gaps).unwrap());
            assert!(rel_close(got, expect, 1e-9), "T={t} delta={delta}");
        }
    }
}

#[test]
fn c1_integral_below_expected_bound() {
    let (t, sigma, gaps) = (2000u64, 1.0, [0.0, 0.3]);
    let curve = BoundCurve::evaluate(
        "c1-special",
        t,
        serde_json::Value::Null,
        &eqo_core::bounds::default_grid(),
        |d| thm_c1_special(t, d, sigma, &gaps),
    )
    .unwrap();
    let integral = expected_bound_via_integral(&curve).unwrap().value.to_float();
    // int_0^1 sqrt(log(4/d)) dd = 4 Gamma(3/2, log 4).
    let upper_gamma = statrs::function::gamma::gamma_ui(1.5, 4f64.ln());
    let root = sigma * (2.0 * t as f64).sqrt();
    let exact = root * (0.5 * (4f64.ln() + 3.0) + 4.0 * upper_gamma) + 0.3;
    assert!(rel_close(integral, exact, 1e-3), "{integral} vs {exact}");
    assert!(integral <= thm_c1_expected(t, sigma, &gaps));
}

fn two_state_input() -> (BonusSchedule, ProxyConstants, LogFactors) {
    let mdp = fixtures::two_state();
    let vt = optimal_values::<f64>(&mdp);
    let tables = variance_proxy(&mdp, &vt, ProxyMode::Table1Bound, GaussianWRule::Table).unwrap();
    let consts = ProxyConstants::from_tables(mdp.v_max(), &tables);
    let ctx = ScheduleContext {
        states: 2,
        actions: 2,
        horizon: 2,
        v_max: 1.0,
        k_max: 3000,
        sigma: None,
    };
    let sched = BonusSchedule::build(&ScheduleSpec::SqrtGrowth(SqrtGrowthParams::default()), ctx).unwrap();
    (sched, consts, LogFactors::new(2, 2, 2))
}

// kappa by direct forward scan of its defining predicate.
fn kappa_by_hand(
    seq: &dyn CoefficientSequence,
    c: &ProxyConstants,
    iota: impl Fn(u64) -> u64,
    k_max: u64,
    delta: f64,
) -> u64 {
    let thr = (2.0 * (13.0 * c.w_diff).sqrt()).max(2.0 * c.v_alpha) * ell1(2, 2, 2, 1, delta);
    let mut last = 0;
    for k in 1..=k_max {
        let c1 = seq.c1_at(k);
        let below = match c1 {
            ExtReal::Finite(x) => x < thr,
            ExtReal::Infinite => false,
        };
        let corr = c1
            .as_finite()
            .map_or(0.0, |x| 6.0 * c.w_diff * ell1(2, 2, 2, iota(k), delta) / x);
        let rhs = (c.sigma_max + corr) * ell2(2, 2, 2, k, delta).sqrt();
        let c2_small = match seq.c2_at(k) {
            ExtReal::Finite(x) => x < rhs,
            ExtReal::Infinite => false,
        };
        if below || c2_small {
            last = k;
        }
    }
    last
}

#[test]
fn b1_term_by_term() {
    let (sched, consts, logs) = two_state_input();
    let input = RlInput {
        logs,
        consts,
        schedule: &sched,
    };
    for (k, delta) in [(3000u64, 0.1), (1000, 0.5), (3000, 0.01)] {
        let li = lambda_iota(|j| sched.c1_at(j), delta, consts.w_diff, consts.v_alpha, k, logs).unwrap();
        let kap = kappa_by_hand(&sched, &consts, |j| li.iota(j) as u64, k, delta).min(k);
        let sum: f64 = (kap + 1..=k)
            .map(|j| 18.0 * consts.w_star * ell1(2, 2, 2, li.iota(j) as u64, delta) / sched.c1_at(j).to_float())
            .sum();
        let c1k = sched.c1_at(k).to_float();
        let min_term = 16.0 * c1k * 4.0 * (k as f64 * 2.0).ln();
        let lower = 72.0 * consts.v_max * 4.0 * 2.0 * ell2(2, 2, 2, k, delta) * (4.0 * k as f64).ln();
        let expect = consts.v_max * kap as f64 + sum + min_term + lower;
        let got = thm_b1(&input, k, delta).unwrap();
        assert!(
            rel_close(total(&got), expect, 1e-9),
            "K={k} delta={delta}: {} vs {expect}",
            total(&got)
        );
    }
}

#[test]
fn e1_term_by_term() {
    let (sched, consts, logs) = two_state_input();
    let input = RlInput {
        logs,
        consts,
        schedule: &sched,
    };
    let per_pair = vec![vec![0.2, 0.5], vec![0.3, 0.4]];
    let floor = 0.2;
    let (k, delta) = (3000u64, 0.1);
    let li = lambda_iota(|j| sched.c1_at(j), delta, consts.w_diff, consts.v_alpha, k, logs).unwrap();
    let kap = kappa_by_hand(&sched, &consts, |j| li.iota(j) as u64, k, delta).min(k);
    let c1k = sched.c1_at(k).to_float();
    let pairs: f64 = per_pair
        .iter()
        .flatten()
        .map(|&g| (64.0 * c1k * (32.0 * c1k / g).ln()).max(0.0))
        .sum();
    let kg = (1..=k)
        .filter(|&j| sched.c1_at(j).to_float() < 36.0 * consts.w_star * ell1(2, 2, 2, li.iota(j) as u64, delta) / floor)
        .max()
        .unwrap_or(0);
    let gap_sum: f64 = (kap + 1..=kg.min(k))
        .map(|j| 144.0 * consts.w_star * ell1(2, 2, 2, li.iota(j) as u64, delta) / sched.c1_at(j).to_float())
        .sum();
    let lower = 288.0 * consts.v_max * 8.0 * ell2(2, 2, 2, k, delta) * (4.0 * k as f64).ln();
    let expect = consts.v_max * kap as f64 + pairs + gap_sum + lower;
    let got = thm_e1(
        &input,
        k,
        delta,
        Some(GapInput {
            per_pair: &per_pair,
            floor,
        }),
        GapVariant::Formal,
    )
    .unwrap();
    assert!(rel_close(total(&got), expect, 1e-9), "{} vs {expect}", total(&got));
}

#[test]
fn cor1_term_by_term() {
    let (sched, consts, logs) = two_state_input();
    let input = RlInput {
        logs,
        consts,
        schedule: &sched,
    };
    let c1 = 1.5;
    let (k, delta) = (3000u64, 0.05);
    let iota_k = sched.iota_at(k).unwrap() as u64;
    let lead = (k as f64 * 4.0 * ell1(2, 2, 2, iota_k, 1.0) * (2.0 * k as f64).ln()).sqrt();
    let coef = 36.0 * (1.0f64 / delta).ln() / (c1 * ell1(2, 2, 2, 1, 1.0)) + 36.0 / c1 + 16.0 * c1;
    let lower = 72.0 * 8.0 * ell2(2, 2, 2, k, delta) * (4.0 * k as f64).ln();
    let got = cor1(&input, c1, k, delta).unwrap();
    assert!(rel_close(total(&got), coef * lead + lower, 1e-9));
}

#[test]
fn cor2_term_by_term() {
    // Constants chosen to satisfy sigma_max^2 <= 2 V_max^2.
    let consts = ProxyConstants {
        v_max: 1.0,
        w_star: 1.5,
        w_diff: 1.0,
        v_alpha: 1.0,
        sigma_max: 1.2,
    };
    let logs = LogFactors::new(2, 2, 2);
    let (c1, c2) = (2.0, 3.0);
    let seq = FnSequence(
        move |k: u64| ExtReal::Finite(c1 * (k as f64).sqrt()),
        move |k: u64| ExtReal::Finite(c2 * (32.0 * 8.0 * k as f64).ln().sqrt()),
    );
    let input = RlInput {
        logs,
        consts,
        schedule: &seq,
    };
    let per_pair = vec![vec![0.25, 0.5], vec![0.3, 0.6]];
    let floor = 0.25;
    let (k, delta) = (2000u64, 0.1);
    let li = lambda_iota(|j| seq.c1_at(j), delta, consts.w_diff, consts.v_alpha, k, logs).unwrap();
    let kap = kappa_by_hand(&seq, &consts, |j| li.iota(j) as u64, k, delta);
    let log_kh = (2.0 * k as f64).ln();
    let kappa2 = (2.0 + log_kh).powi(2) * (4.0 / (c2 * c2) * (1.0f64 / delta).ln()).exp();
    let thr = (2.0 * 13f64.sqrt()).max(2.0) * ell1(2, 2, 2, 1, delta);
    let kappa1 = 4.0 * log_kh / ell1(2, 2, 2, 1, 1.0) * (thr / c1).powi(2);
    let (c1k, c2k) = (seq.c1_at(k).to_float(), seq.c2_at(k).to_float());
    let pairs: f64 = per_pair
        .iter()
        .flatten()
        .map(|&g| (2048.0 * c2k * c2k / g).min((64.0 * c1k * (32.0 * c1k / g).ln()).max(0.0)))
        .sum();
    let kg = (1..=k)
        .filter(|&j| seq.c1_at(j).to_float() < 36.0 * consts.w_star * ell1(2, 2, 2, li.iota(j) as u64, delta) / floor)
        .max()
        .unwrap_or(0);
    let upper = kg.max(kap).min(k);
    let gap_sum: f64 = (1..=upper)
        .map(|j| 144.0 * consts.w_star * ell1(2, 2, 2, li.iota(j) as u64, delta) / seq.c1_at(j).to_float())
        .sum();
    let lower = 288.0 * 8.0 * ell2(2, 2, 2, k, delta) * (4.0 * k as f64).ln();
    let expect = (k as f64).min(kappa1.max(kappa2)) + pairs + gap_sum + lower;
    let got = cor2(
        &input,
        Cor2Params::new(c1, c2),
        k,
        delta,
        Some(GapInput {
            per_pair: &per_pair,
            floor,
        }),
    )
    .unwrap();
    assert!(rel_close(total(&got), expect, 1e-9), "{} vs {expect}", total(&got));
}

#[test]
fn b1_monotone_in_delta_and_k() {
    let (sched, consts, logs) = two_state_input();
    let input = RlInput {
        logs,
        consts,
        schedule: &sched,
    };
    let deltas = eqo_core::bounds::log_grid(30, 1e-6, 1.0);
    let vals: Vec<f64> = deltas
        .iter()
        .map(|&d| total(&thm_b1(&input, 3000, d).unwrap()))
        .collect();
    assert!(
        vals.windows(2).all(|w| w[1] <= w[0]),
        "not nonincreasing in delta: {vals:?}"
    );
    let by_k: Vec<f64> = [10u64, 100, 500, 1000, 2000, 3000]
        .iter()
        .map(|&k| total(&thm_b1(&input, k, 0.1).unwrap()))
        .collect();
    assert!(
        by_k.windows(2).all(|w| w[1] >= w[0]),
        "not nondecreasing in K: {by_k:?}"
    );
}

#[test]
fn sqrt_growth_schedule_is_nondecreasing() {
    let ctx = ScheduleContext {
        states: 2,
        actions: 2,
        horizon: 2,
        v_max: 1.0,
        k_max: 10_000,
        sigma: None,
    };
    let sched = BonusSchedule::build(&ScheduleSpec::SqrtGrowth(SqrtGrowthParams::default()), ctx).unwrap();
    let c: Vec<f64> = (1..=10_000).map(|k| sched.c1_at(k).to_float()).collect();
    assert!(c.windows(2).all(|w| w[1] >= w[0]));
}
