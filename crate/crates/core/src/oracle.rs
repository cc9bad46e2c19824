//! Monte Carlo ground truth for outage areas and outage probabilities.
//!
//! Nothing in the solver path calls into this module. Samples are split into
//! fixed chunks of [`CHUNK_SIZE`]; chunk `i` draws from stream `i` of the
//! caller's seed, so the estimate does not depend on the thread count.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::CoverageProblem;
use crate::scenario::{sample_disk, sample_true_location, stream_rng, ChannelParams, UserSpec};

/// Samples per independently seeded chunk.
pub const CHUNK_SIZE: u64 = 1 << 16;

/// Default sample count for area checks.
pub const AREA_SAMPLES: u64 = 10_000_000;

/// Default sample count for outage checks.
pub const OUTAGE_SAMPLES: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub sample_count: u64,
}

impl McEstimate {
    /// Binomial estimate from `hits` out of `n`, scaled by `scale`.
    fn binomial(hits: u64, n: u64, scale: f64) -> Self {
        let p = hits as f64 / n as f64;
        Self {
            value: p * scale,
            std_error: (p * (1.0 - p) / n as f64).sqrt() * scale,
            sample_count: n,
        }
    }

    /// Whether `x` lies within `k` standard errors of the estimate.
    pub fn within(&self, x: f64, k: f64) -> bool {
        (x - self.value).abs() <= k * self.std_error
    }
}

/// Counts the samples, out of `n`, for which `hit` returns true.
fn count_hits<F>(n: u64, seed: u64, hit: F) -> u64
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> bool + Sync,
{
    assert!(n >= 1, "sample count must be positive");
    let chunks = n.div_ceil(CHUNK_SIZE);
    (0..chunks)
        .into_par_iter()
        .map(|i| {
            let len = CHUNK_SIZE.min(n - i * CHUNK_SIZE);
            let mut rng = stream_rng(seed, i);
            (0..len).filter(|_| hit(&mut rng)).count() as u64
        })
        .sum()
}

/// Outage area of `p` by uniform sampling of the uncertainty disk.
pub fn mc_outage_area(p: &CoverageProblem, n: u64, seed: u64) -> McEstimate {
    let c2 = p.c * p.c;
    let hits = count_hits(n, seed, |rng| {
        let (dx, dy) = sample_disk(p.r, rng);
        let (x, y) = (dx - p.b, dy);
        x * x + y * y > c2
    });
    McEstimate::binomial(hits, n, PI * p.r * p.r)
}

/// Instantaneous rate at squared 3-D distance `dist2`, bps/Hz.
fn rate(power: f64, dist2: f64, params: &ChannelParams) -> f64 {
    (params.eta * power / (dist2 * params.noise_power)).ln_1p() / std::f64::consts::LN_2
}

/// Fraction of sampled true locations whose rate falls short of the target.
pub fn empirical_outage(
    user: &UserSpec,
    x_pin: f64,
    power: f64,
    params: &ChannelParams,
    n: u64,
    seed: u64,
) -> McEstimate {
    let h2 = params.height * params.height;
    let hits = count_hits(n, seed, |rng: &mut rand_chacha::ChaCha8Rng| {
        let (x, y) = sample_true_location(user, rng);
        let dx = x - x_pin;
        rate(power, dx * dx + y * y + h2, params) < user.target_rate
    });
    McEstimate::binomial(hits, n, 1.0)
}

/// Standard error of a Bernoulli(`p`) mean over `n` samples.
pub fn bernoulli_std_error(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}
