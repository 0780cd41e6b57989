//! Randomized Halton sequences with Cranley–Patterson shifts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::quadrature::pairwise_sum;

const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

/// Radical inverse of `i` in base `b`.
pub fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

/// The `i`-th Halton point in `D ≤ 6` dimensions, skipping the origin.
pub fn halton<const D: usize>(i: u64) -> [f64; D] {
    std::array::from_fn(|k| radical_inverse(i + 1, PRIMES[k]))
}

/// Mean and standard error over independently shifted replicates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QmcEstimate {
    pub value: f64,
    pub err: f64,
}

impl QmcEstimate {
    pub fn from_replicates(r: &[f64]) -> Self {
        let n = r.len() as f64;
        let mean = pairwise_sum(r) / n;
        let var = if r.len() > 1 {
            pairwise_sum(&r.iter().map(|x| (x - mean) * (x - mean)).collect::<Vec<_>>()) / (n - 1.0)
        } else {
            0.0
        };
        Self {
            value: mean,
            err: (var / n).sqrt(),
        }
    }
}

/// Number of shifted replicates per estimate.
pub const REPLICATES: usize = 8;

/// Cranley–Patterson shifts for `replicates` copies, drawn from a seeded stream.
pub fn shifts<const D: usize>(seed: u64, stream: u64, replicates: usize) -> Vec<[f64; D]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..replicates).map(|_| std::array::from_fn(|_| rng.random::<f64>())).collect()
}

/// Randomized-QMC mean of `f` over [0,1)^D with `n` points per replicate.
/// The result does not depend on the thread count.
pub fn rqmc_mean<const D: usize, F>(f: F, n: usize, seed: u64, stream: u64) -> QmcEstimate
where
    F: Fn(&[f64; D]) -> f64 + Sync,
{
    let sh = shifts::<D>(seed, stream, REPLICATES);
    let reps: Vec<f64> = sh
        .iter()
        .map(|s| {
            let vals: Vec<f64> = (0..n as u64)
                .into_par_iter()
                .map(|i| {
                    let h = halton::<D>(i);
                    let u: [f64; D] = std::array::from_fn(|k| (h[k] + s[k]).fract());
                    f(&u)
                })
                .collect();
            pairwise_sum(&vals) / n as f64
        })
        .collect();
    QmcEstimate::from_replicates(&reps)
}
