use eqo_core::mdp::fixtures::{random_small, RandomNoise};
use eqo_core::mdp::{optimal_values, policy_value, MdpSpec, Policy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// Forward evaluation: propagate the state distribution from (h0, s0) and
// accumulate expected per-step quantities. Independent of backward induction.
pub fn forward(
    mdp: &MdpSpec,
    pi: &[usize],
    h0: usize,
    s0: usize,
    per_step: impl Fn(usize, usize, usize) -> f64,
) -> f64 {
    let ss = mdp.states();
    let mut dist = vec![0.0; ss];
    dist[s0] = 1.0;
    let mut total = 0.0;
    for h in h0..mdp.horizon() {
        let mut next = vec![0.0; ss];
        for s in 0..ss {
            if dist[s] == 0.0 {
                continue;
            }
            let a = pi[h * ss + s];
            total += dist[s] * per_step(h, s, a);
            for (j, p) in mdp.transition_row(s, a).iter().enumerate() {
                next[j] += dist[s] * p;
            }
        }
        dist = next;
    }
    total
}

pub fn all_policies(mdp: &MdpSpec) -> Vec<Vec<usize>> {
    let cells = mdp.horizon() * mdp.states();
    let mut out = vec![vec![]];
    for _ in 0..cells {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..mdp.actions()).map(move |a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out
}

pub fn instance(seed: u64, s: usize, a: usize, h: usize, noise: RandomNoise) -> MdpSpec {
    random_small(&mut ChaCha8Rng::seed_from_u64(seed), s, a, h, noise)
}

/// Largest gap between the library's policy and optimal values and the
/// forward-evaluation oracle over all deterministic policies.
pub fn value_error(mdp: &MdpSpec) -> f64 {
    let vt = optimal_values::<f64>(mdp);
    let (hh, ss) = (mdp.horizon(), mdp.states());
    let mut best = vec![vec![f64::NEG_INFINITY; ss]; hh];
    let mut err = 0.0f64;
    for flat in all_policies(mdp) {
        let pi = Policy::from_flat(ss, flat.clone());
        let v = policy_value::<f64>(mdp, &pi);
        for h in 0..hh {
            for s in 0..ss {
                let fwd = forward(mdp, &flat, h, s, |h, s, a| mdp.mean_reward(h, s, a));
                err = err.max((v[h][s] - fwd).abs());
                best[h][s] = best[h][s].max(fwd);
            }
        }
    }
    for h in 0..hh {
        for s in 0..ss {
            err = err.max((vt.v_star[h][s] - best[h][s]).abs());
        }
    }
    err
}

/// `max_pi max_(h, s) E[sum 0.5 sigma_exp2]` by enumeration.
pub fn brute_w_star(mdp: &MdpSpec, sigma_exp2: &[Vec<Vec<f64>>]) -> f64 {
    let mut w = 0.0f64;
    for flat in all_policies(mdp) {
        for h in 0..mdp.horizon() {
            for s0 in 0..mdp.states() {
                w = w.max(forward(mdp, &flat, h, s0, |h, s, a| 0.5 * sigma_exp2[h][s][a]));
            }
        }
    }
    w
}
