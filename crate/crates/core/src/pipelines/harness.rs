// SPDX-License-Identifier: Apache-2.0

//! Exact harnesses that run a pipeline against online adversaries and
//! compare the outcome with the guarantee its proof gives.

use std::cell::RefCell;
use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::dist::mask;
use crate::error::{invalid, Result};
use crate::prims::{
    verify_seeded_extractor, verify_two_source_extractor, worst_over_flat, SeededCondenser, SeededExtractor, SeededMap, SeededWidths,
    TwoSourceExtractor,
};
use crate::sources::{
    complete_source, distance_from_masses, for_each_good_assignment, smooth_from_masses, subset_masses, BlockFunction,
    GoodBlockModel, GoodPrefixAdversary, OnlineAdversary, SourceSpec, StrategySpace,
};
use crate::trial_rng;

use super::params::{exact_good_outputs, good_output_count};
use super::{sliding_window_transform, split_condenser_inputs, two_piece_condense, xor_multi_extract, SplitCondenserConfig, XorCondenserConfig};

const TOL: f64 = 1e-12;

/// Deterministic strategies to try: all of them when within
/// `budget.strategies`, otherwise `battery` random ones.
fn strategies(
    spec: &SourceSpec,
    goods: &GoodBlockModel,
    battery: u64,
    seed: u64,
    budget: &Budget,
) -> Result<(Vec<GoodPrefixAdversary>, bool)> {
    if let Ok(space) = StrategySpace::new(spec, goods, budget) {
        return Ok(((0..space.count()).map(|s| space.strategy(s)).collect(), true));
    }
    let out = (0..battery)
        .map(|t| GoodPrefixAdversary::random(spec, goods, &mut trial_rng(seed, t)))
        .collect::<Result<Vec<_>>>()?;
    Ok((out, false))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlidingWindowCase {
    pub spec: SourceSpec,
    pub goods: GoodBlockModel,
    pub two_ext: TwoSourceExtractor,
    pub d: usize,
    /// Random strategies used when exhaustive enumeration is over budget.
    pub battery: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlidingWindowReport {
    /// Worst two-source error at `(k1, k)` for `k1 = 0..=d*n`.
    pub two_ext_errors: Vec<f64>,
    /// Output positions `i` (2-based, as `O_i`) that are good.
    pub good_outputs: Vec<usize>,
    pub good_output_bound: f64,
    pub strategies: usize,
    pub exhaustive: bool,
    /// Largest `|(O_i, O_<i) - (U, O_<i)|` seen per good output.
    pub worst_distance: BTreeMap<usize, f64>,
    /// Smallest `H~(window_i | O_<i)` seen per good output.
    pub min_window_entropy: BTreeMap<usize, f64>,
    /// Smallest `bound - distance` over all strategies and good outputs.
    pub min_margin: f64,
    pub passed: bool,
}

/// Average-case bound for a window with `H~(W | O_<i) = h`: for each
/// integer `k1 <= h`, Markov gives `Pr[H(W | o) < k1] <= 2^-(h - k1)`.
fn average_case_bound(errors: &[f64], h: f64) -> f64 {
    errors
        .iter()
        .enumerate()
        .filter(|(k1, _)| *k1 as f64 <= h + 1e-9)
        .map(|(k1, e)| e + (-(h - k1 as f64)).exp2())
        .fold(1.0, f64::min)
}

/// Runs the sliding-window transform under every strategy in scope and
/// checks each good output block against the average-case two-source
/// guarantee, conditioned exactly on the earlier outputs.
pub fn sliding_window_check(case: &SlidingWindowCase, budget: &Budget) -> Result<SlidingWindowReport> {
    let spec = &case.spec;
    let n = spec.n;
    let d = case.d;
    let m = case.two_ext.m;
    let mut plain = case.two_ext.clone();
    plain.strong_first = false;
    let errors = (0..=plain.n1)
        .map(|k1| verify_two_source_extractor(&plain, k1, spec.k, 1.0, budget).map(|r| r.measured))
        .collect::<Result<Vec<_>>>()?;
    let good: Vec<bool> = (1..=spec.ell).map(|b| !spec.is_bad(b)).collect();
    // Output O_i (i = 2..ell) sits at vector index i - 2.
    let good_outputs: Vec<usize> = (2..=spec.ell)
        .filter(|&i| good[i - 1] && good[(i - 1).saturating_sub(d)..i - 1].iter().any(|&b| b))
        .collect();
    let bound = good_output_count(spec.g as i64, spec.ell as i64, d as i64)?;
    let count_ok = exact_good_outputs(&good, d) as i64 * *bound.denom() >= *bound.numer();
    let supports = case.goods.supports(spec)?;
    let (advs, exhaustive) = strategies(spec, &case.goods, case.battery, case.seed, budget)?;
    let wbits = d as u32 * n;
    type Acc = BTreeMap<u64, (Vec<f64>, Vec<f64>)>;
    let per: Vec<Result<Vec<(usize, f64, f64, f64)>>> = advs
        .par_iter()
        .map(|adv| {
            let mut acc: BTreeMap<usize, Acc> = BTreeMap::new();
            for_each_good_assignment(spec, &supports, |w, values| {
                let blocks = complete_source(spec, adv as &dyn OnlineAdversary, values)?;
                let outs = sliding_window_transform(&blocks, n, &case.two_ext, d)?;
                for &i in &good_outputs {
                    let prior = outs[..i - 2].iter().fold(0u64, |a, &o| (a << m) | o);
                    let window = (0..d).fold(0u64, |a, t| {
                        let v = (i - 1 + t).checked_sub(d).map_or(0, |j| blocks[j]);
                        (a << n) | v
                    });
                    let e = acc
                        .entry(i)
                        .or_default()
                        .entry(prior)
                        .or_insert_with(|| (vec![0.0; 1 << wbits], vec![0.0; 1 << m]));
                    e.0[window as usize] += w;
                    e.1[outs[i - 2] as usize] += w;
                }
                Ok(())
            })?;
            Ok(acc
                .into_iter()
                .map(|(i, by_prior)| {
                    let mut guess = 0.0;
                    let mut dist = 0.0;
                    for (wins, outs) in by_prior.values() {
                        guess += wins.iter().cloned().fold(0.0, f64::max);
                        let p: f64 = outs.iter().sum();
                        let u = p / outs.len() as f64;
                        dist += 0.5 * outs.iter().map(|q| (q - u).abs()).sum::<f64>();
                    }
                    let h = -guess.log2();
                    (i, h, dist, average_case_bound(&errors, h))
                })
                .collect())
        })
        .collect();
    let mut worst_distance = BTreeMap::new();
    let mut min_window_entropy = BTreeMap::new();
    let mut min_margin = f64::INFINITY;
    for r in per {
        for (i, h, dist, b) in r? {
            let wd = worst_distance.entry(i).or_insert(0.0f64);
            *wd = wd.max(dist);
            let me = min_window_entropy.entry(i).or_insert(f64::INFINITY);
            *me = me.min(h);
            min_margin = min_margin.min(b - dist);
        }
    }
    Ok(SlidingWindowReport {
        two_ext_errors: errors,
        good_output_bound: *bound.numer() as f64 / *bound.denom() as f64,
        good_outputs,
        strategies: advs.len(),
        exhaustive,
        worst_distance,
        min_window_entropy,
        min_margin,
        passed: count_ok && min_margin >= -TOL,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XorCondenserCase {
    /// Original block count and width; the harness works on `2 ell`
    /// half-blocks of `n / 2` bits.
    pub ell: usize,
    pub n: u32,
    pub cfg: XorCondenserConfig,
    /// Target error; `None` uses the construction's own error
    /// `max_j delta_j 2^b` over the patterns.
    pub eps: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XorPattern {
    /// Bad half-blocks.
    pub bad: Vec<usize>,
    /// First good seed index.
    pub j: usize,
    /// Bits of later seeds, `sum_{i > j} n_{y,i}`.
    pub b: u32,
    /// Worst distance from uniform with the later seeds uniform.
    pub delta_j: f64,
    /// Worst `H_inf^{delta_j 2^b}` under the real adversary, when that
    /// smoothing parameter is below 1.
    pub predicted_entropy: Option<f64>,
    /// Worst `H_inf^eps` under the real adversary at the report's `eps`.
    pub entropy: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XorCondenserReport {
    pub m: u32,
    /// `max_j min(1, delta_j 2^b)` over the patterns.
    pub eps_construction: f64,
    pub eps: f64,
    pub patterns: Vec<XorPattern>,
    /// Every pattern meets `m - b` at smoothing `delta_j 2^b`.
    pub bound_holds: bool,
    /// Every pattern meets `m - b` at the configured `eps`.
    pub passed: bool,
}

fn xor_block_function(case: &XorCondenserCase) -> Result<BlockFunction> {
    if !case.n.is_multiple_of(2) {
        return Err(invalid("n", "harness needs even n"));
    }
    let half = case.n / 2;
    let m = case.cfg.exts.first().ok_or_else(|| invalid("exts", "empty"))?.map.widths.m;
    let ell = case.ell;
    let total = 2 * ell;
    let probe = |halves: &[u64]| -> Result<u64> {
        let w = (0..ell).fold(0u64, |a, i| (a << half) | halves[i]);
        let ys: Vec<u64> = (0..ell)
            .map(|i| crate::dist::prefix_bits(halves[ell + i], half, case.cfg.n_y[i]))
            .collect();
        xor_multi_extract(w, &ys, &case.cfg.exts)
    };
    let err = RefCell::new(None);
    let f = BlockFunction::from_fn(total, half, m, |hb| {
        probe(hb).unwrap_or_else(|e| {
            err.borrow_mut().get_or_insert(e);
            0
        })
    })?;
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(f),
    }
}

/// Checks the XOR condenser on the half-block source for every bad set
/// that leaves a good block among both `W` and the seed half-blocks.
pub fn xor_condenser_check(case: &XorCondenserCase, budget: &Budget) -> Result<XorCondenserReport> {
    let ell = case.ell;
    if case.cfg.n_y.len() != ell {
        return Err(invalid("n_y", "one prefix length per block"));
    }
    let half = case.n / 2;
    let cond = xor_block_function(case)?;
    let m = cond.m;
    let total = 2 * ell;
    let mut patterns = Vec::new();
    let mut masses_by_pattern = Vec::new();
    for bad_mask in 0u32..1 << total {
        let bad: Vec<usize> = (1..=total).filter(|b| (bad_mask >> (b - 1)) & 1 == 1).collect();
        let w_good = (1..=ell).any(|b| !bad.contains(&b));
        let Some(j) = (1..=ell).find(|i| !bad.contains(&(ell + i))) else { continue };
        if !w_good {
            continue;
        }
        let spec = SourceSpec::new(total, half, half, bad.iter().copied())?;
        let relaxed = SourceSpec::new(total, half, half, bad.iter().copied().filter(|&x| x <= ell + j))?;
        let b: u32 = case.cfg.n_y[j..].iter().sum();
        let goods = GoodBlockModel::Uniform;
        let delta_j = distance_from_masses(&subset_masses(&cond, &relaxed, &goods, budget)?, m);
        let masses = subset_masses(&cond, &spec, &goods, budget)?;
        let bound_eps = delta_j * (b as f64).exp2();
        let predicted_entropy = (bound_eps < 1.0).then(|| smooth_from_masses(&masses, m, bound_eps).value);
        patterns.push(XorPattern { bad, j, b, delta_j, predicted_entropy, entropy: 0.0, bound: m as f64 - b as f64 });
        masses_by_pattern.push(masses);
    }
    let eps_construction = patterns
        .iter()
        .map(|p| (p.delta_j * (p.b as f64).exp2()).min(1.0))
        .fold(0.0, f64::max);
    let eps = case.eps.unwrap_or(eps_construction);
    if case.eps.is_some() && !(0.0..1.0).contains(&eps) {
        return Err(invalid("eps", format!("{eps} outside [0, 1)")));
    }
    // A construction error of 1 is vacuous; every entropy is reported as 0.
    if eps < 1.0 {
        for (p, masses) in patterns.iter_mut().zip(&masses_by_pattern) {
            p.entropy = smooth_from_masses(masses, m, eps).value;
        }
    }
    let bound_holds = patterns
        .iter()
        .all(|p| p.predicted_entropy.is_none_or(|h| h >= p.bound - 1e-9));
    let passed = eps < 1.0 && patterns.iter().all(|p| p.entropy >= p.bound - 1e-9);
    Ok(XorCondenserReport { m, eps_construction, eps, patterns, bound_holds, passed })
}

/// Draws `tries` pairs of random extractor tables (seed widths `n_y`,
/// source width `ell * n / 2`, output `m`) and keeps the configuration
/// with the smallest construction error. Ties keep the earliest trial.
pub fn search_xor_condenser(
    ell: usize,
    n: u32,
    n_y: &[u32],
    m: u32,
    seed: u64,
    tries: u64,
    budget: &Budget,
) -> Result<(XorCondenserCase, XorCondenserReport)> {
    if tries == 0 {
        return Err(invalid("tries", "must be positive"));
    }
    let src = ell as u32 * (n / 2);
    let mut best: Option<(XorCondenserCase, XorCondenserReport)> = None;
    for t in 0..tries {
        let exts = n_y
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let map = SeededMap::random(SeededWidths { n: src, d, m }, seed, t * n_y.len() as u64 + i as u64)?;
                Ok(SeededExtractor { map, strong: false })
            })
            .collect::<Result<Vec<_>>>()?;
        let case = XorCondenserCase { ell, n, cfg: XorCondenserConfig { n_y: n_y.to_vec(), exts }, eps: None };
        let report = xor_condenser_check(&case, budget)?;
        if best.as_ref().is_none_or(|(_, b)| report.eps_construction < b.eps_construction) {
            best = Some((case, report));
        }
    }
    Ok(best.expect("tries > 0"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XorEntropyReport {
    pub j: usize,
    /// Worst distance from uniform over flat sources and fixings of the
    /// seeds before `j`, with seeds `j..` uniform.
    pub measured: f64,
    /// `min_{k'} err_j(k') + 2^-(k - m - k')` over integers `k' <= k - m`.
    pub bound: f64,
    pub ext_errors: Vec<f64>,
    pub passed: bool,
}

/// Exact check of the XOR extractor with seeds `1..j-1` fixed and seeds
/// `j..t` uniform (`j` is 1-based).
pub fn xor_entropy_check(exts: &[SeededExtractor], k: u32, j: usize, budget: &Budget) -> Result<XorEntropyReport> {
    if j == 0 || j > exts.len() {
        return Err(invalid("j", format!("{j} outside 1..={}", exts.len())));
    }
    let (n, m) = (exts[0].map.widths.n, exts[0].map.widths.m);
    let fix_bits: u32 = exts[..j - 1].iter().map(|e| e.map.widths.d).sum();
    let free_bits: u32 = exts[j - 1..].iter().map(|e| e.map.widths.d).sum();
    if fix_bits + free_bits > 20 {
        return Err(invalid("seeds", "total seed width above 20 bits"));
    }
    let split = |packed: u64, list: &[SeededExtractor]| -> Vec<u64> {
        let mut shift = 0;
        list.iter()
            .map(|e| {
                let v = (packed >> shift) & mask(e.map.widths.d);
                shift += e.map.widths.d;
                v
            })
            .collect()
    };
    let fixings = 1usize << fix_bits;
    let frees = 1usize << free_bits;
    let outs = 1usize << m;
    let mut contrib = Vec::with_capacity((1usize << n) * fixings * frees);
    for x in 0..1u64 << n {
        for f in 0..fixings {
            for s in 0..frees {
                let mut seeds = split(f as u64, &exts[..j - 1]);
                seeds.extend(split(s as u64, &exts[j - 1..]));
                contrib.push((f * outs + xor_multi_extract(x, &seeds, exts)? as usize) as u32);
            }
        }
    }
    let size = 1u64 << k;
    let total = size * frees as u64;
    let worst = worst_over_flat(n, k, budget, fixings * frees, &contrib, fixings * outs, |c| {
        c.chunks(outs)
            .map(|row| {
                let l1: u64 = row.iter().map(|&v| (v as u64 * outs as u64).abs_diff(total)).sum();
                l1 as f64 / (2.0 * (total * outs as u64) as f64)
            })
            .fold(0.0, f64::max)
    })?;
    let ext_errors = (0..=k)
        .map(|k1| verify_seeded_extractor(&exts[j - 1], k1, false, 1.0, budget).map(|r| r.measured))
        .collect::<Result<Vec<_>>>()?;
    let slack = k as i64 - m as i64;
    let bound = (0..=slack.max(-1))
        .filter(|&k1| k1 >= 0)
        .map(|k1| ext_errors[k1 as usize] + (-((slack - k1) as f64)).exp2())
        .fold(1.0, f64::min);
    Ok(XorEntropyReport { j, measured: worst.score, bound, ext_errors, passed: worst.score <= bound + TOL })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitPattern {
    /// Bad original blocks.
    pub bad: Vec<usize>,
    /// Bits of `V` written by the adversary.
    pub b: u32,
    /// Worst `H_inf^eps` with the adversarial `V` bits replaced by uniform.
    pub relaxed_entropy: f64,
    /// Worst `H_inf^{eps 2^b}` under the real adversary, when below 1.
    pub entropy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitCheck {
    pub m: u32,
    pub eps: f64,
    pub patterns: Vec<SplitPattern>,
    /// Every pattern satisfies `entropy >= relaxed_entropy - b`.
    pub passed: bool,
}

/// Runs the split-block condenser against every placement of at most
/// `ell/2 - e` bad blocks, comparing the real adversary with the one whose
/// `V` bits are replaced by uniform ones.
pub fn split_condenser_check(ell: usize, n: u32, e: usize, cfg: &SplitCondenserConfig, eps: f64, budget: &Budget) -> Result<SplitCheck> {
    if !n.is_multiple_of(2) {
        return Err(invalid("n", "harness needs even n"));
    }
    if 2 * e > ell {
        return Err(invalid("e", "needs e <= ell/2"));
    }
    let half = n / 2;
    let m = cfg.scond.map.widths.m;
    let total = 2 * ell;
    let scond: &SeededCondenser = &cfg.scond;
    let err = RefCell::new(None);
    let cond = BlockFunction::from_fn(total, half, m, |hb| {
        let blocks: Vec<u64> = (0..ell).map(|b| (hb[2 * b] << half) | hb[2 * b + 1]).collect();
        split_condenser_inputs(&blocks, n, cfg.n_v)
            .and_then(|(u, v)| two_piece_condense(u, v, scond))
            .unwrap_or_else(|x| {
                err.borrow_mut().get_or_insert(x);
                0
            })
    })?;
    if let Some(x) = err.into_inner() {
        return Err(x);
    }
    let max_bad = ell / 2 - e;
    let mut patterns = Vec::new();
    for mask_bad in 0u32..1 << ell {
        if mask_bad.count_ones() as usize > max_bad {
            continue;
        }
        let bad: Vec<usize> = (1..=ell).filter(|b| (mask_bad >> (b - 1)) & 1 == 1).collect();
        let halves: Vec<usize> = bad.iter().flat_map(|&b| [2 * b - 1, 2 * b]).collect();
        // Half-block h (1-based) feeds V when h > ell.
        let b = halves.iter().filter(|&&h| h > ell).count() as u32 * cfg.n_v;
        let spec = SourceSpec::new(total, half, half, halves.iter().copied())?;
        let relaxed = SourceSpec::new(total, half, half, halves.iter().copied().filter(|&h| h <= ell))?;
        let goods = GoodBlockModel::Uniform;
        let relaxed_entropy = smooth_from_masses(&subset_masses(&cond, &relaxed, &goods, budget)?, m, eps).value;
        let eps_b = eps * (b as f64).exp2();
        let entropy = if eps_b < 1.0 {
            Some(smooth_from_masses(&subset_masses(&cond, &spec, &goods, budget)?, m, eps_b).value)
        } else {
            None
        };
        patterns.push(SplitPattern { bad, b, relaxed_entropy, entropy });
    }
    let passed = patterns
        .iter()
        .all(|p| p.entropy.is_none_or(|h| h >= p.relaxed_entropy - p.b as f64 - 1e-9));
    Ok(SplitCheck { m, eps, patterns, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prims::lhl_extractor;

    #[test]
    fn average_case_bound_picks_best_split() {
        let errors = [1.0, 0.5, 0.1];
        // h = 2: k1 = 2 gives 0.1 + 1, k1 = 1 gives 0.5 + 0.5, k1 = 0 gives 1.25.
        assert_eq!(average_case_bound(&errors, 2.0), 1.0);
        assert!((average_case_bound(&errors, 5.0) - (0.1 + 0.125)).abs() < 1e-15);
    }

    #[test]
    fn xor_entropy_with_toeplitz() {
        let e = lhl_extractor(4, 1).unwrap();
        let exts = vec![e.clone(), e];
        let r = xor_entropy_check(&exts, 3, 2, &Budget::default()).unwrap();
        assert!(r.passed, "{r:?}");
        let r1 = xor_entropy_check(&exts, 3, 1, &Budget::default()).unwrap();
        assert!(r1.passed, "{r1:?}");
    }

    #[test]
    fn split_check_runs() {
        let map = SeededMap::random(SeededWidths { n: 4, d: 4, m: 3 }, 3, 0).unwrap();
        let cfg = SplitCondenserConfig { n_v: 1, scond: SeededCondenser { map } };
        let r = split_condenser_check(4, 2, 1, &cfg, 0.05, &Budget::default()).unwrap();
        assert_eq!(r.patterns.len(), 5);
        assert!(r.passed, "{r:?}");
    }
}
