//! Monte-Carlo check of the over-issuance model.
//!
//! Each day every permit holder of lot k arrives independently with
//! probability p, so arrivals are Binomial(A_k, p). The simulator draws the
//! coin flips explicitly and compares the empirical mean, standard deviation
//! and overflow frequency against the analytic values.
//!
//! Random numbers come from ChaCha8 seeded with `seed`; lot k draws from
//! stream k of that generator. Lots are simulated in parallel, and because
//! each lot owns its stream the report is identical to a sequential run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::ProblemInstance;
use crate::permits::{service_deviate, PermitIssuance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LotOverflow {
    /// 0-based lot index.
    pub lot: usize,
    pub permits: i64,
    pub spaces: i64,
    pub trials: u64,
    pub mean_arrivals: f64,
    pub std_arrivals: f64,
    /// Fraction of days with more arrivals than spaces.
    pub overflow_probability: f64,
    /// p·A_k.
    pub expected_mean: f64,
    /// √(p(1−p)·A_k).
    pub expected_std: f64,
    /// P(Binomial(A_k, p) > N_k).
    pub exact_overflow: f64,
    /// (N_k − p·A_k)/√(p(1−p)·A_k); NaN when the variance is zero.
    pub normal_deviate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverflowReport {
    pub seed: u64,
    pub trials: u64,
    pub arrival_probability: f64,
    pub lots: Vec<LotOverflow>,
}

/// `ln(k!)` for k in `0..=n`.
fn ln_factorials(n: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0f64;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// P(X > threshold) for X ~ Binomial(n, p), summed in log space.
pub fn exact_binomial_tail(n: u64, p: f64, threshold: u64) -> f64 {
    if threshold >= n || p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let lf = ln_factorials(n);
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let n_us = n as usize;
    let terms: Vec<f64> = ((threshold as usize + 1)..=n_us)
        .map(|k| lf[n_us] - lf[k] - lf[n_us - k] + k as f64 * lp + (n_us - k) as f64 * lq)
        .collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    (max + sum.ln()).exp().min(1.0)
}

fn simulate_lot(
    lot: usize,
    permits: i64,
    spaces: i64,
    p: f64,
    trials: u64,
    seed: u64,
) -> LotOverflow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(lot as u64);
    let holders = permits.max(0) as u64;
    let mut sum: u128 = 0;
    let mut sum_sq: u128 = 0;
    let mut overflow: u64 = 0;
    for _ in 0..trials {
        let mut arrivals: u64 = 0;
        for _ in 0..holders {
            arrivals += u64::from(rng.gen_bool(p));
        }
        sum += u128::from(arrivals);
        sum_sq += u128::from(arrivals) * u128::from(arrivals);
        if arrivals as i64 > spaces {
            overflow += 1;
        }
    }
    let t = trials as f64;
    let mean = sum as f64 / t;
    // Sample variance from exact integer moments.
    let var = if trials > 1 {
        let num = trials as u128 * sum_sq - sum * sum;
        num as f64 / (t * (t - 1.0))
    } else {
        0.0
    };
    let a = permits as f64;
    let expected_var = p * (1.0 - p) * a;
    LotOverflow {
        lot,
        permits,
        spaces,
        trials,
        mean_arrivals: mean,
        std_arrivals: var.sqrt(),
        overflow_probability: overflow as f64 / t,
        expected_mean: p * a,
        expected_std: expected_var.sqrt(),
        exact_overflow: exact_binomial_tail(holders, p, spaces.max(0) as u64),
        normal_deviate: if expected_var > 0.0 {
            service_deviate(spaces, a, p)
        } else {
            f64::NAN
        },
    }
}

/// Simulates `trials` days for every lot. `trials` must be at least 1.
pub fn simulate_arrivals(
    permits: &PermitIssuance,
    instance: &ProblemInstance,
    trials: u64,
    seed: u64,
) -> OverflowReport {
    assert!(trials >= 1, "at least one trial is required");
    let p = instance.arrival_probability;
    let lots = permits
        .per_lot
        .par_iter()
        .enumerate()
        .map(|(k, &a)| {
            let spaces = instance.lots.get(k).map_or(0, |l| l.total_capacity());
            simulate_lot(k, a, spaces, p, trials, seed)
        })
        .collect();
    OverflowReport {
        seed,
        trials,
        arrival_probability: p,
        lots,
    }
}
