// SPDX-License-Identifier: Apache-2.0

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{pack_blocks, sample_source, GoodBlockModel, OnlineAdversary, SourceSpec};
use crate::boolfn::BooleanFunction;
use crate::error::{invalid, Error, Result};
use crate::trial_rng;

/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_900_4;

/// Wilson score interval for `successes` out of `trials` at quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub trials: u64,
    pub successes: u64,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub uniform_e: f64,
    /// `|mean - uniform_e|`.
    pub bias: f64,
}

/// Counts trials for which `trial` returns true. Trial `t` gets the
/// stream `(seed, t)`, so results do not depend on thread count.
pub fn monte_carlo_mean(
    trials: u64,
    seed: u64,
    trial: impl Fn(&mut rand_chacha::ChaCha8Rng) -> Result<bool> + Sync,
) -> Result<u64> {
    (0..trials)
        .into_par_iter()
        .map(|t| trial(&mut trial_rng(seed, t)).map(|b| b as u64))
        .sum::<Result<u64>>()
}

/// Sampled `E f(X)` under `adv` with a 99% interval.
pub fn monte_carlo_bias(
    f: &BooleanFunction,
    spec: &SourceSpec,
    goods: &GoodBlockModel,
    adv: &dyn OnlineAdversary,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    if trials < 100 {
        return Err(invalid("trials", format!("{trials} < 100")));
    }
    if f.ell() != spec.total_bits() {
        return Err(Error::WidthMismatch { expected: spec.total_bits(), found: f.ell() });
    }
    goods.validate(spec)?;
    let successes = monte_carlo_mean(trials, seed, |rng| {
        let blocks = sample_source(spec, adv, goods, rng)?;
        Ok(f.get(pack_blocks(&blocks, spec.n)))
    })?;
    let mean = successes as f64 / trials as f64;
    let (ci_low, ci_high) = wilson_interval(successes, trials, Z_99);
    let uniform_e = f.expectation();
    Ok(McEstimate {
        trials,
        successes,
        mean,
        ci_low,
        ci_high,
        uniform_e,
        bias: (mean - uniform_e).abs(),
    })
}
