// SPDX-License-Identifier: Apache-2.0

//! Exact worst-case verification over flat sources.
//!
//! Every source of min-entropy `k` is a convex combination of flat
//! `k`-sources, and each error measured here is convex in the source, so
//! enumerating flat sources gives the exact worst case.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::dist::{flat_source_count, smoothing_cap, FlatSource};
use crate::error::{invalid, over_budget, Result};

use super::{SeededCondenser, SeededExtractor, TwoSourceExtractor};

/// Slack for floating comparisons against claimed thresholds.
const TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Property {
    SeededExtractor { k: u32, strong: bool },
    SeededCondenser { k_in: u32, k_out: f64 },
    TwoSourceExtractor { k1: u32, k2: u32, strong_first: bool },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub object: String,
    pub property: Property,
    /// Claimed error, or the smoothing parameter for a condenser.
    pub eps: f64,
    /// Worst error for extractors, worst smooth min-entropy for condensers.
    pub measured: f64,
    pub passed: bool,
    /// Sources attaining `measured`. For two-source extractors the first
    /// entry is the `X1` support and the second the `X2` support.
    pub witness: Vec<FlatSource>,
    pub flat_sources_checked: u64,
}

/// Result of a flat-source maximisation.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatWorst {
    pub score: f64,
    /// Lexicographically first support attaining `score`.
    pub support: Vec<u64>,
    pub checked: u64,
}

struct Walk<'a, F> {
    n_elems: u64,
    size: usize,
    stride: usize,
    contrib: &'a [u32],
    score: &'a F,
}

impl<F: Fn(&[u32]) -> f64> Walk<'_, F> {
    fn add(&self, counts: &mut [u32], x: u64, sign: bool) {
        let row = &self.contrib[x as usize * self.stride..(x as usize + 1) * self.stride];
        for &i in row {
            if sign {
                counts[i as usize] += 1;
            } else {
                counts[i as usize] -= 1;
            }
        }
    }

    fn dfs(&self, counts: &mut [u32], chosen: &mut Vec<u64>, best: &mut (f64, Vec<u64>, u64)) {
        if chosen.len() == self.size {
            let s = (self.score)(counts);
            best.2 += 1;
            if s > best.0 {
                best.0 = s;
                best.1.clone_from(chosen);
            }
            return;
        }
        let start = chosen.last().map_or(0, |&x| x + 1);
        let stop = self.n_elems - (self.size - chosen.len()) as u64;
        for x in start..=stop {
            self.add(counts, x, true);
            chosen.push(x);
            self.dfs(counts, chosen, best);
            chosen.pop();
            self.add(counts, x, false);
        }
    }
}

/// Maximises `score(counts)` over every flat `k`-source on `n` bits.
///
/// Element `x` contributes one to each of the `stride` counters listed in
/// `contrib[x * stride..(x + 1) * stride]`; `counts` is the sum over the
/// support. Ties go to the lexicographically first support.
pub fn worst_over_flat<F>(
    n: u32,
    k: u32,
    budget: &Budget,
    stride: usize,
    contrib: &[u32],
    rows: usize,
    score: F,
) -> Result<FlatWorst>
where
    F: Fn(&[u32]) -> f64 + Sync,
{
    let count = flat_source_count(n, k)?;
    if count > budget.flat_sources as u128 {
        return Err(over_budget("flat sources", count, budget.flat_sources));
    }
    let n_elems = 1u64 << n;
    if contrib.len() != n_elems as usize * stride || contrib.iter().any(|&i| i as usize >= rows) {
        return Err(invalid("contrib", "table shape does not match n, stride and rows"));
    }
    let size = 1usize << k;
    let walk = Walk { n_elems, size, stride, contrib, score: &score };
    // Split on the first two elements so tasks stay balanced.
    let depth = size.min(2);
    let mut heads: Vec<Vec<u64>> = vec![vec![]];
    for _ in 0..depth {
        heads = heads
            .into_iter()
            .flat_map(|h| {
                let start = h.last().map_or(0, |&x| x + 1);
                let stop = n_elems - (size - h.len()) as u64;
                (start..=stop).map(move |x| {
                    let mut g = h.clone();
                    g.push(x);
                    g
                })
            })
            .collect();
    }
    let results: Vec<(f64, Vec<u64>, u64)> = heads
        .into_par_iter()
        .map(|mut chosen| {
            let mut counts = vec![0u32; rows];
            for &x in &chosen {
                walk.add(&mut counts, x, true);
            }
            let mut best = (f64::NEG_INFINITY, Vec::new(), 0);
            walk.dfs(&mut counts, &mut chosen, &mut best);
            best
        })
        .collect();
    let mut out = FlatWorst { score: f64::NEG_INFINITY, support: vec![], checked: 0 };
    for (s, sup, c) in results {
        out.checked += c;
        if s > out.score {
            out.score = s;
            out.support = sup;
        }
    }
    Ok(out)
}

/// `sum_z |c_z 2^m - total|`, twice the scaled distance from uniform.
fn scaled_l1(counts: &[u32], total: u64) -> u64 {
    let cells = counts.len() as u64;
    counts.iter().map(|&c| (c as u64 * cells).abs_diff(total)).sum()
}

/// Worst `|Ext(X, U_d) - U_m|` (or `|(Ext(X, U_d), U_d) - (U_m, U_d)|`
/// when `strong`) over flat `k`-sources.
pub fn verify_seeded_extractor(
    ext: &SeededExtractor,
    k: u32,
    strong: bool,
    eps: f64,
    budget: &Budget,
) -> Result<VerificationReport> {
    ext.map.validate()?;
    let w = ext.map.widths;
    if k > w.n {
        return Err(invalid("k", format!("{k} exceeds n = {}", w.n)));
    }
    let seeds = 1usize << w.d;
    let outs = 1usize << w.m;
    let contrib: Vec<u32> = (0..1u64 << w.n)
        .flat_map(|x| {
            (0..seeds as u64).map(move |s| {
                let z = ext.map.eval(x, s) as usize;
                (if strong { s as usize * outs + z } else { z }) as u32
            })
        })
        .collect();
    let rows = if strong { seeds * outs } else { outs };
    let size = 1u64 << k;
    let total_cells = (seeds * outs) as f64;
    let worst = worst_over_flat(w.n, k, budget, seeds, &contrib, rows, |c| {
        if strong {
            let l1: u64 = c.chunks(outs).map(|row| scaled_l1(row, size)).sum();
            l1 as f64 / (2.0 * size as f64 * total_cells)
        } else {
            scaled_l1(c, size * seeds as u64) as f64 / (2.0 * size as f64 * total_cells)
        }
    })?;
    Ok(VerificationReport {
        object: ext.map.id(),
        property: Property::SeededExtractor { k, strong },
        eps,
        measured: worst.score,
        passed: worst.score <= eps + TOL,
        witness: vec![FlatSource::new(w.n, worst.support)?],
        flat_sources_checked: worst.checked,
    })
}

/// Worst `H_inf^eps(Cond(X, U_d))` over flat `k_in`-sources.
pub fn verify_seeded_condenser(
    cond: &SeededCondenser,
    k_in: u32,
    k_out: f64,
    eps: f64,
    budget: &Budget,
) -> Result<VerificationReport> {
    cond.map.validate()?;
    if !(0.0..1.0).contains(&eps) {
        return Err(invalid("eps", format!("{eps} outside [0, 1)")));
    }
    let w = cond.map.widths;
    if k_in > w.n {
        return Err(invalid("k_in", format!("{k_in} exceeds n = {}", w.n)));
    }
    let seeds = 1u64 << w.d;
    let contrib: Vec<u32> = (0..1u64 << w.n)
        .flat_map(|x| (0..seeds).map(move |s| cond.map.eval(x, s) as u32))
        .collect();
    let total = ((1u64 << k_in) * seeds) as f64;
    let worst = worst_over_flat(w.n, k_in, budget, seeds as usize, &contrib, 1 << w.m, |c| {
        let probs: Vec<f64> = c.iter().map(|&v| v as f64 / total).collect();
        if eps == 0.0 {
            probs.iter().cloned().fold(0.0, f64::max)
        } else {
            smoothing_cap(&probs, eps)
        }
    })?;
    let measured = -worst.score.log2();
    Ok(VerificationReport {
        object: cond.map.id(),
        property: Property::SeededCondenser { k_in, k_out },
        eps,
        measured,
        passed: measured >= k_out - TOL,
        witness: vec![FlatSource::new(w.n, worst.support)?],
        flat_sources_checked: worst.checked,
    })
}

/// Sum of the `take` largest values.
fn top_sum(values: &mut [f64], take: usize) -> f64 {
    let len = values.len();
    values.select_nth_unstable_by(len - take, |a, b| a.partial_cmp(b).unwrap());
    let mut top = values[len - take..].to_vec();
    top.sort_by(|a, b| b.partial_cmp(a).unwrap());
    top.iter().sum()
}

/// Indices of the `take` largest values, ties to the smaller index.
fn top_indices(values: &[f64], take: usize) -> Vec<u64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap().then(a.cmp(&b)));
    let mut out: Vec<u64> = idx[..take].iter().map(|&i| i as u64).collect();
    out.sort_unstable();
    out
}

/// Per-`x1` score vector for a fixed `X2` support (given as counts) and,
/// for the plain property, the output set `Z`.
fn per_x1(c: &[u32], outs: usize, k2_size: f64, set: Option<u64>) -> Vec<f64> {
    let unit = 1.0 / outs as f64;
    c.chunks(outs)
        .map(|row| match set {
            None => scaled_l1(row, k2_size as u64) as f64 / (2.0 * k2_size * outs as f64),
            Some(z) => {
                let hits: u32 = (0..outs).filter(|&o| (z >> o) & 1 == 1).map(|o| row[o]).sum();
                hits as f64 / k2_size - z.count_ones() as f64 * unit
            }
        })
        .collect()
}

/// Worst error over flat `k1`- and `k2`-sources.
///
/// `X2` supports are enumerated. For a fixed `X2` the best `X1` is exact:
/// when strong in the first source the error is the average over `X1` of
/// per-`x1` distances, maximised by the `2^k1` largest; otherwise it is
/// `max_Z` of an average, maximised by the `2^k1` largest per `Z`.
pub fn verify_two_source_extractor(
    ext: &TwoSourceExtractor,
    k1: u32,
    k2: u32,
    eps: f64,
    budget: &Budget,
) -> Result<VerificationReport> {
    ext.validate()?;
    if k1 > ext.n1 || k2 > ext.n2 {
        return Err(invalid("k", format!("({k1}, {k2}) exceeds widths ({}, {})", ext.n1, ext.n2)));
    }
    let strong = ext.strong_first;
    if !strong && ext.m > 3 {
        return Err(over_budget("output bits for the plain two-source verifier", ext.m, 3));
    }
    let outs = 1usize << ext.m;
    let xs = 1usize << ext.n1;
    let contrib: Vec<u32> = (0..1u64 << ext.n2)
        .flat_map(|y| (0..xs as u64).map(move |x| (x as usize * outs + ext.eval(x, y) as usize) as u32))
        .collect();
    let s1 = 1usize << k1;
    let s2 = (1u64 << k2) as f64;
    let sets: Vec<u64> = (1..(1u64 << outs) - 1).collect();
    let worst = worst_over_flat(ext.n2, k2, budget, xs, &contrib, xs * outs, |c| {
        if strong {
            top_sum(&mut per_x1(c, outs, s2, None), s1) / s1 as f64
        } else {
            sets.iter()
                .map(|&z| top_sum(&mut per_x1(c, outs, s2, Some(z)), s1) / s1 as f64)
                .fold(0.0, f64::max)
        }
    })?;
    // Recover the X1 half of the witness.
    let mut counts = vec![0u32; xs * outs];
    for &y in &worst.support {
        for &i in &contrib[y as usize * xs..(y as usize + 1) * xs] {
            counts[i as usize] += 1;
        }
    }
    let x1 = if strong {
        top_indices(&per_x1(&counts, outs, s2, None), s1)
    } else {
        let mut best = (f64::NEG_INFINITY, 0u64);
        for &z in &sets {
            let v = top_sum(&mut per_x1(&counts, outs, s2, Some(z)), s1);
            if v > best.0 {
                best = (v, z);
            }
        }
        top_indices(&per_x1(&counts, outs, s2, Some(best.1)), s1)
    };
    let measured = worst.score.max(0.0);
    Ok(VerificationReport {
        object: ext.id(),
        property: Property::TwoSourceExtractor { k1, k2, strong_first: strong },
        eps,
        measured,
        passed: measured <= eps + TOL,
        witness: vec![FlatSource::new(ext.n1, x1)?, FlatSource::new(ext.n2, worst.support)?],
        flat_sources_checked: worst.checked,
    })
}
