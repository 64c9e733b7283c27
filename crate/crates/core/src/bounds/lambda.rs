use crate::scalar::ExtReal;

use super::logs::LogFactors;
use super::BoundError;

/// Left side of the sandwich, `l1(i)/lambda + 13 lambda W_diff l1(1)`.
pub fn sandwich_lower(ell_i: f64, lambda: f64, w_diff: f64, ell1_one: f64) -> f64 {
    ell_i / lambda + 13.0 * lambda * w_diff * ell1_one
}

/// Right side of the sandwich, `4 l1(i)/lambda`.
pub fn sandwich_upper(ell_i: f64, lambda: f64) -> f64 {
    4.0 * ell_i / lambda
}

/// Smaller root of `13 lambda^2 W_diff l1(1) - c lambda + l1(i) = 0`.
///
/// The root is nudged upward by single ulps until the left side of the sandwich
/// evaluates to at most `c`, so the inequality holds exactly in floating point.
pub fn solve_lambda(ell_i: f64, c: f64, w_diff: f64, ell1_one: f64) -> Result<f64, BoundError> {
    let a = 13.0 * w_diff * ell1_one;
    let mut lambda = if a == 0.0 {
        ell_i / c
    } else {
        let mut disc = c * c - 4.0 * a * ell_i;
        if disc < 0.0 && disc > -1e-12 * c * c {
            disc = 0.0;
        }
        if disc < 0.0 {
            return Err(BoundError::NoRoot { c, ell: ell_i });
        }
        2.0 * ell_i / (c + disc.sqrt())
    };
    for _ in 0..64 {
        if sandwich_lower(ell_i, lambda, w_diff, ell1_one) <= c {
            return Ok(lambda);
        }
        lambda = lambda.next_up();
    }
    Err(BoundError::NoRoot { c, ell: ell_i })
}

/// Incremental construction of `lambda_i` / `iota_k` for a nondecreasing `c1` sequence.
#[derive(Clone, Debug)]
pub struct LambdaIotaBuilder {
    logs: LogFactors,
    delta: f64,
    w_diff: f64,
    ell1_one: f64,
    threshold: f64,
    lambdas: Vec<f64>,
    upper: f64,
    last_c: f64,
    k: u64,
}

impl LambdaIotaBuilder {
    pub fn new(logs: LogFactors, delta: f64, w_diff: f64, v_alpha: f64) -> Self {
        let ell1_one = logs.ell1(1, delta);
        LambdaIotaBuilder {
            logs,
            delta,
            w_diff,
            ell1_one,
            threshold: (2.0 * (13.0 * w_diff).sqrt()).max(2.0 * v_alpha) * ell1_one,
            lambdas: Vec::new(),
            upper: f64::NEG_INFINITY,
            last_c: f64::NEG_INFINITY,
            k: 0,
        }
    }

    /// `(2 sqrt(13 W_diff) v 2 V_alpha) l1(1, delta)`.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Index of the most recent interval, or 1 before the first one opens.
    pub fn current(&self) -> u32 {
        self.lambdas.len().max(1) as u32
    }

    /// True if pushing `c` would open a new interval.
    pub fn would_open(&self, c: f64) -> bool {
        c >= self.threshold && (self.lambdas.is_empty() || c > self.upper)
    }

    /// Records `c1,k` for the next `k` and returns `iota_k`.
    pub fn push(&mut self, c: ExtReal) -> Result<u32, BoundError> {
        self.k += 1;
        let ExtReal::Finite(c) = c else {
            return Ok(self.current());
        };
        if c < self.last_c {
            return Err(BoundError::NonMonotoneSchedule { k: self.k });
        }
        self.last_c = c;
        if c < self.threshold {
            return Ok(1);
        }
        if self.would_open(c) {
            let i = self.lambdas.len() as u64 + 1;
            let ell_i = self.logs.ell1(i, self.delta);
            let lambda = solve_lambda(ell_i, c, self.w_diff, self.ell1_one)?;
            self.upper = sandwich_upper(ell_i, lambda);
            self.lambdas.push(lambda);
        }
        Ok(self.current())
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }
}

/// `lambda_i` and `iota_k` for `k = 1..=k_max`.
#[derive(Clone, Debug)]
pub struct LambdaIota {
    pub delta: f64,
    pub w_diff: f64,
    pub v_alpha: f64,
    pub threshold: f64,
    lambdas: Vec<f64>,
    iota: Vec<u32>,
}

impl LambdaIota {
    pub fn k_max(&self) -> u64 {
        self.iota.len() as u64
    }

    /// `iota_k` for `1 <= k <= k_max`.
    pub fn iota(&self, k: u64) -> u32 {
        self.iota[(k - 1) as usize]
    }

    /// `lambda_i` for `1 <= i <= interval count`.
    pub fn lambda(&self, i: u32) -> f64 {
        self.lambdas[(i - 1) as usize]
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn intervals(&self) -> usize {
        self.lambdas.len()
    }
}

/// Builds the sequences for `c1_at(1..=k_max)` at confidence `delta`.
pub fn lambda_iota(
    c1_at: impl Fn(u64) -> ExtReal,
    delta: f64,
    w_diff: f64,
    v_alpha: f64,
    k_max: u64,
    logs: LogFactors,
) -> Result<LambdaIota, BoundError> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(BoundError::InvalidDelta(delta));
    }
    let mut b = LambdaIotaBuilder::new(logs, delta, w_diff, v_alpha);
    let iota = (1..=k_max).map(|k| b.push(c1_at(k))).collect::<Result<Vec<_>, _>>()?;
    Ok(LambdaIota {
        delta,
        w_diff,
        v_alpha,
        threshold: b.threshold,
        lambdas: b.lambdas,
        iota,
    })
}
