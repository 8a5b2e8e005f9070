// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_with_rng, Outcome, PlayerAdversary, ProtocolSpec, Variant};
use crate::error::{invalid, Result};
use crate::sources::{wilson_interval, Z_99};
use crate::trial_rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub trials: u64,
    pub good_leaders: u64,
    pub good_leader_freq: f64,
    /// 99% Wilson interval for the good-leader frequency.
    pub ci_low: f64,
    pub ci_high: f64,
    /// Per stage boundary `i = 1..=rounds+1`: survivors entering round `i`.
    pub survivors_mean: Vec<f64>,
    pub survivors_min: Vec<usize>,
    pub good_survivors_mean: Vec<f64>,
    pub good_survivors_min: Vec<usize>,
    /// Outcome label to count; sums to `trials`.
    pub histogram: BTreeMap<String, u64>,
}

#[derive(Clone, Debug, Default)]
struct Acc {
    good_leaders: u64,
    sum_p: Vec<u64>,
    min_p: Vec<usize>,
    sum_g: Vec<u64>,
    min_g: Vec<usize>,
    histogram: BTreeMap<Outcome, u64>,
}

impl Acc {
    fn add(mut self, good: bool, traj: &[(usize, usize)], outcome: Outcome) -> Self {
        if self.sum_p.is_empty() {
            self.sum_p = vec![0; traj.len()];
            self.sum_g = vec![0; traj.len()];
            self.min_p = vec![usize::MAX; traj.len()];
            self.min_g = vec![usize::MAX; traj.len()];
        }
        self.good_leaders += good as u64;
        for (i, &(p, g)) in traj.iter().enumerate() {
            self.sum_p[i] += p as u64;
            self.sum_g[i] += g as u64;
            self.min_p[i] = self.min_p[i].min(p);
            self.min_g[i] = self.min_g[i].min(g);
        }
        *self.histogram.entry(outcome).or_default() += 1;
        self
    }

    fn merge(mut self, other: Acc) -> Acc {
        if self.sum_p.is_empty() {
            return other;
        }
        if other.sum_p.is_empty() {
            return self;
        }
        self.good_leaders += other.good_leaders;
        for i in 0..self.sum_p.len() {
            self.sum_p[i] += other.sum_p[i];
            self.sum_g[i] += other.sum_g[i];
            self.min_p[i] = self.min_p[i].min(other.min_p[i]);
            self.min_g[i] = self.min_g[i].min(other.min_g[i]);
        }
        for (k, v) in other.histogram {
            *self.histogram.entry(k).or_default() += v;
        }
        self
    }
}

/// Runs `trials` independent executions; trial `t` draws good messages
/// from `trial_rng(seed, t)`. Integer accumulators keep the result
/// independent of the thread count.
pub fn estimate_leader_quality(
    spec: &ProtocolSpec,
    adv: &dyn PlayerAdversary,
    trials: u64,
    seed: u64,
) -> Result<RunStats> {
    spec.validate()?;
    if trials == 0 {
        return Err(invalid("trials", "must be positive"));
    }
    let bad = adv.bad_set();
    let acc = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<Acc> {
            let run = run_with_rng(spec, adv, &mut trial_rng(seed, t))?;
            let good = matches!(run.outcome, Outcome::Leader(j) if !bad.contains(&j));
            Ok(Acc::default().add(good, &run.trajectory, run.outcome))
        })
        .try_reduce(Acc::default, |a, b| Ok(a.merge(b)))?;
    let n = trials as f64;
    let (ci_low, ci_high) = wilson_interval(acc.good_leaders, trials, Z_99);
    Ok(RunStats {
        trials,
        good_leaders: acc.good_leaders,
        good_leader_freq: acc.good_leaders as f64 / n,
        ci_low,
        ci_high,
        survivors_mean: acc.sum_p.iter().map(|&s| s as f64 / n).collect(),
        survivors_min: acc.min_p,
        good_survivors_mean: acc.sum_g.iter().map(|&s| s as f64 / n).collect(),
        good_survivors_min: acc.min_g,
        histogram: acc.histogram.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivorClaim {
    pub variant: Variant,
    pub g: usize,
    pub trials: u64,
    /// Trials in which every stage boundary met its bound.
    pub satisfied: u64,
    pub fraction: f64,
    /// Lower bound on `g_i` for `i = 1..=r+1`.
    pub bounds: Vec<f64>,
    pub good_survivors_min: Vec<usize>,
    /// Failure probability the survivor claim states.
    pub stated_failure: f64,
}

/// Survivor bounds for the stage-1 rounds of `spec`:
/// one-bit `g/2^i - 5 (g/2^i)^{2/3}`, multi-bit
/// `g/prod_{j<i} b_j - 2 (g/prod_{j<i} b_j)^{2/3}`.
pub fn survivor_bounds(spec: &ProtocolSpec, variant: Variant, g: usize) -> Vec<f64> {
    let bins = spec.stage_one_bins();
    let g = g as f64;
    (1..=bins.len() + 1)
        .map(|i| match variant {
            Variant::OneBit => {
                let x = g / (i as f64).exp2();
                x - 5.0 * x.powf(2.0 / 3.0)
            }
            Variant::MultiBit => {
                let x = g / bins[..i - 1].iter().map(|&b| b as f64).product::<f64>();
                x - 2.0 * x.powf(2.0 / 3.0)
            }
        })
        .collect()
}

/// Fraction of Monte Carlo trials in which the good survivor counts meet
/// the stage-1 survivor bounds at every stage boundary.
pub fn survivor_claim_check(
    spec: &ProtocolSpec,
    variant: Variant,
    adv: &dyn PlayerAdversary,
    trials: u64,
    seed: u64,
) -> Result<SurvivorClaim> {
    spec.validate()?;
    if trials == 0 {
        return Err(invalid("trials", "must be positive"));
    }
    let bad = adv.bad_set();
    let g = spec.players - bad.len();
    let bounds = survivor_bounds(spec, variant, g);
    let r = bounds.len();
    let (satisfied, mins) = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(u64, Vec<usize>)> {
            let run = run_with_rng(spec, adv, &mut trial_rng(seed, t))?;
            let goods: Vec<usize> = run.trajectory[..r].iter().map(|x| x.1).collect();
            let ok = goods.iter().zip(&bounds).all(|(&gi, &b)| gi as f64 >= b);
            Ok((ok as u64, goods))
        })
        .try_reduce(
            || (0, vec![usize::MAX; r]),
            |a, b| Ok((a.0 + b.0, a.1.iter().zip(&b.1).map(|(x, y)| *x.min(y)).collect())),
        )?;
    let bins = spec.stage_one_bins();
    let last = spec.players as f64 / bins.iter().map(|&b| b as f64).product::<f64>();
    let stated_failure = match variant {
        Variant::OneBit => (-(g as f64 / (bins.len() as f64).exp2()) / 10.0).exp(),
        Variant::MultiBit => (-last.log2().max(0.0).powf(0.2)).exp(),
    };
    Ok(SurvivorClaim {
        variant,
        g,
        trials,
        satisfied,
        fraction: satisfied as f64 / trials as f64,
        bounds,
        good_survivors_min: mins,
        stated_failure,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingStats {
    pub m: u32,
    pub trials: u64,
    /// Count per outcome in `0..2^m`; sums to `trials`.
    pub histogram: Vec<u64>,
    pub max_prob: f64,
    /// 99% Wilson interval for the most frequent outcome's probability.
    pub max_prob_ci: (f64, f64),
    /// `-log2 max_prob`.
    pub min_entropy_estimate: f64,
    /// `-log2` of the upper end of `max_prob_ci`. The maximum over outcomes
    /// is biased upward, so this is conservative only up to that selection.
    pub min_entropy_lower: f64,
}

/// Histogram of `sample` over `trials` draws, trial `t` using
/// `trial_rng(seed, t)`.
pub fn collective_sampling_stats(
    m: u32,
    trials: u64,
    seed: u64,
    sample: impl Fn(&mut ChaCha8Rng) -> Result<u64> + Sync,
) -> Result<SamplingStats> {
    if m > 20 {
        return Err(invalid("m", format!("{m} above 20 bits")));
    }
    if trials == 0 {
        return Err(invalid("trials", "must be positive"));
    }
    let size = 1usize << m;
    let histogram = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<Vec<u64>> {
            let z = sample(&mut trial_rng(seed, t))?;
            if z >> m != 0 {
                return Err(invalid("sample", format!("outcome {z} outside {m} bits")));
            }
            let mut h = vec![0u64; size];
            h[z as usize] = 1;
            Ok(h)
        })
        .try_reduce(|| vec![0u64; size], |mut a, b| {
            a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
            Ok(a)
        })?;
    let top = histogram.iter().copied().max().unwrap_or(0);
    let max_prob = top as f64 / trials as f64;
    let max_prob_ci = wilson_interval(top, trials, Z_99);
    Ok(SamplingStats {
        m,
        trials,
        histogram,
        max_prob,
        max_prob_ci,
        min_entropy_estimate: -max_prob.log2(),
        min_entropy_lower: -max_prob_ci.1.log2(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{
        run_protocol, two_stage_leader_election, ConstantPlayers, CrowdingAdversary, FinalStage, OutcomeRule, RoundKind,
        StageConstants,
    };

    #[test]
    fn honest_runs_always_elect_good_leaders() {
        let c = StageConstants { c0: 1.0, c1: 1.5, delta: 0.1 };
        let spec = two_stage_leader_election(32, Variant::OneBit, &c, FinalStage::IndexElection).unwrap();
        let s = estimate_leader_quality(&spec, &ConstantPlayers::honest(), 1000, 3).unwrap();
        assert_eq!(s.good_leaders + s.histogram.get("none").copied().unwrap_or(0), 1000);
        assert_eq!(s.histogram.values().sum::<u64>(), 1000);
        assert!(s.survivors_min.iter().zip(&s.survivors_mean).all(|(&a, &b)| a as f64 <= b));
    }

    #[test]
    fn stats_do_not_depend_on_threads() {
        let c = StageConstants { c0: 1.0, c1: 1.5, delta: 0.1 };
        let spec = two_stage_leader_election(64, Variant::OneBit, &c, FinalStage::IndexElection).unwrap();
        let adv = CrowdingAdversary::new(1..=6, 0);
        let a = estimate_leader_quality(&spec, &adv, 1000, 5).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| estimate_leader_quality(&spec, &adv, 1000, 5).unwrap());
        assert_eq!(a, b);
        let mut seq = BTreeMap::<String, u64>::new();
        for t in 0..1000 {
            let run = run_with_rng(&spec, &adv, &mut trial_rng(5, t)).unwrap();
            *seq.entry(run.outcome.to_string()).or_default() += 1;
        }
        assert_eq!(seq, a.histogram);
        let _ = run_protocol(&spec, &adv, 5).unwrap();
    }

    #[test]
    fn xor_sampling_with_a_bad_last_player() {
        let spec = ProtocolSpec { players: 4, rounds: vec![RoundKind::Broadcast { width: 2 }], outcome: OutcomeRule::Xor };
        let adv = CrowdingAdversary::new([4], 3);
        let s = collective_sampling_stats(2, 500, 1, |rng| match run_with_rng(&spec, &adv, rng)?.outcome {
            Outcome::Value(v) => Ok(v),
            _ => unreachable!(),
        })
        .unwrap();
        assert_eq!(s.max_prob, 1.0);
        assert_eq!(s.histogram[3], 500);
        let honest = ConstantPlayers::honest();
        let u = collective_sampling_stats(2, 20_000, 1, |rng| match run_with_rng(&spec, &honest, rng)?.outcome {
            Outcome::Value(v) => Ok(v),
            _ => unreachable!(),
        })
        .unwrap();
        assert!(u.min_entropy_estimate > 1.9);
    }
}
