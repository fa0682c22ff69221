//! Seeded, replication-parallel Monte Carlo plumbing.
//!
//! Each replication gets its own generator derived from `(seed, index)`, so
//! the set of sampled values is a pure function of the configuration and the
//! merge below is independent of thread count and work partitioning:
//! indicator statistics are merged as exact integer counts, continuous
//! statistics are folded sequentially in replication order.

use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// splitmix64 step.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Seed for replication `index` of a run with master seed `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut s = seed ^ 0x6a09e667f3bcc909u64.wrapping_mul(index.wrapping_add(1));
    let a = splitmix64(&mut s);
    let b = splitmix64(&mut s);
    a ^ b.rotate_left(17)
}

pub fn rng_for(seed: u64, index: u64) -> ChaCha12Rng {
    use rand::SeedableRng;
    ChaCha12Rng::seed_from_u64(derive_seed(seed, index))
}

/// Run `n` independent replications and collect their outputs in
/// replication order.
pub fn replicate<T, F>(seed: u64, n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut ChaCha12Rng) -> T + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i);
            f(i, &mut rng)
        })
        .collect()
}

/// Count replications where `f` holds (exact integer merge).
pub fn count<F>(seed: u64, n: u64, f: F) -> u64
where
    F: Fn(u64, &mut ChaCha12Rng) -> bool + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i);
            u64::from(f(i, &mut rng))
        })
        .sum()
}

/// Wilson score interval for a binomial proportion at `z` standard normal
/// units (z = 1.96 for the 95% interval).
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// A Monte Carlo estimate: value, standard error, sample count and the seed
/// that produced it. `n = 0` with zero standard error marks an exact
/// evaluation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, stderr: 0.0, n: 0, seed: 0 }
    }

    /// Estimate of `scale * P(event)` from an indicator count.
    pub fn from_indicator(successes: u64, n: u64, scale: f64, seed: u64) -> Self {
        assert!(n > 0);
        let nf = n as f64;
        let p = successes as f64 / nf;
        // sample standard deviation of the indicator, over sqrt(n)
        let stderr = if n > 1 {
            scale * (p * (1.0 - p) * nf / (nf - 1.0)).sqrt() / nf.sqrt()
        } else {
            0.0
        };
        Estimate { value: scale * p, stderr, n, seed }
    }

    /// Estimate of `scale * E[v]` from per-replication values, folded in
    /// replication order.
    pub fn from_values(values: &[f64], scale: f64, seed: u64) -> Self {
        let n = values.len() as u64;
        assert!(n > 0);
        let mut mean = 0.0f64;
        let mut m2 = 0.0f64;
        for (i, &v) in values.iter().enumerate() {
            let k = (i + 1) as f64;
            let delta = v - mean;
            mean += delta / k;
            m2 += delta * (v - mean);
        }
        let stderr = if n > 1 {
            scale * (m2 / (n as f64 - 1.0)).sqrt() / (n as f64).sqrt()
        } else {
            0.0
        };
        Estimate { value: scale * mean, stderr, n, seed }
    }

    /// Combined standard error of two independent estimates.
    pub fn combined_stderr(&self, other: &Estimate) -> f64 {
        (self.stderr * self.stderr + other.stderr * other.stderr).sqrt()
    }
}

/// Configure the global worker pool from the `SPHERTESS_THREADS` environment
/// variable (0 or unset = automatic). Call once at process start; later calls
/// are ignored by rayon.
pub fn init_threads_from_env() {
    if let Ok(v) = std::env::var("SPHERTESS_THREADS") {
        if let Ok(k) = v.trim().parse::<usize>() {
            if k > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
        }
    }
}
