// SPDX-License-Identifier: Apache-2.0

//! Block sources with online adversaries.
//!
//! Blocks are numbered `1..=ell`. A bad block is written by an adversary
//! that sees the values of all earlier blocks and nothing else. When a
//! whole source is packed into one integer, block `j` occupies bits
//! `n*(j-1) .. n*j`.

mod adversary;
mod game;
mod montecarlo;

pub use adversary::{
    ConstantAdversary, CrowdingAdversary, FnAdversary, GoodPrefixAdversary, OnlineAdversary,
    TableAdversary, UniformRandomAdversary,
};
pub use game::{
    brute_force_oi_b, distance_from_masses, optimal_online_bias, smooth_from_masses, solve_game, subset_masses, worst_case_distance,
    worst_case_point_mass, worst_case_smooth_min_entropy, BruteForceReport, Direction, GameValue,
    OnlineBiasReport, PointMassReport, SmoothWorstCase, StrategySpace,
};
pub use montecarlo::{monte_carlo_bias, monte_carlo_mean, wilson_interval, McEstimate, Z_99};

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::boolfn::BooleanFunction;
use crate::budget::Budget;
use crate::dist::{mask, Distribution};
use crate::error::{invalid, over_budget, Error, Result};

/// Shape of a source: `ell` blocks of `n` bits, `g` of them good with
/// min-entropy `k` each.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSourceSpec")]
pub struct SourceSpec {
    pub ell: usize,
    pub n: u32,
    pub g: usize,
    pub k: u32,
    pub bad_set: BTreeSet<usize>,
}

#[derive(Deserialize)]
struct RawSourceSpec {
    ell: usize,
    n: u32,
    g: usize,
    k: u32,
    bad_set: BTreeSet<usize>,
}

impl TryFrom<RawSourceSpec> for SourceSpec {
    type Error = Error;

    fn try_from(r: RawSourceSpec) -> Result<Self> {
        let spec = SourceSpec { ell: r.ell, n: r.n, g: r.g, k: r.k, bad_set: r.bad_set };
        spec.validate()?;
        Ok(spec)
    }
}

impl SourceSpec {
    /// Builds a spec from its bad set; `g` is derived.
    pub fn new(ell: usize, n: u32, k: u32, bad_set: impl IntoIterator<Item = usize>) -> Result<Self> {
        let bad_set: BTreeSet<usize> = bad_set.into_iter().collect();
        let spec = SourceSpec {
            ell,
            n,
            g: ell.saturating_sub(bad_set.len()),
            k,
            bad_set,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// All blocks good and uniform.
    pub fn uniform(ell: usize, n: u32) -> Result<Self> {
        SourceSpec::new(ell, n, n, [])
    }

    pub fn validate(&self) -> Result<()> {
        if self.ell == 0 {
            return Err(invalid("ell", "must be positive"));
        }
        if self.n == 0 || self.n > 63 {
            return Err(invalid("n", format!("{} outside 1..=63", self.n)));
        }
        if self.k == 0 || self.k > self.n {
            return Err(invalid("k", format!("{} outside 1..={}", self.k, self.n)));
        }
        if self.g == 0 || self.g > self.ell {
            return Err(invalid("g", format!("{} outside 1..={}", self.g, self.ell)));
        }
        if let Some(&b) = self.bad_set.iter().find(|&&b| b == 0 || b > self.ell) {
            return Err(Error::IndexOutOfRange { index: b, len: self.ell });
        }
        if self.bad_set.len() != self.ell - self.g {
            return Err(invalid(
                "bad_set",
                format!("has {} blocks but ell - g = {}", self.bad_set.len(), self.ell - self.g),
            ));
        }
        Ok(())
    }

    pub fn is_bad(&self, block: usize) -> bool {
        self.bad_set.contains(&block)
    }

    pub fn good_blocks(&self) -> Vec<usize> {
        (1..=self.ell).filter(|b| !self.is_bad(*b)).collect()
    }

    pub fn total_bits(&self) -> u32 {
        self.ell as u32 * self.n
    }

    pub(crate) fn check_dp_bits(&self, budget: &Budget) -> Result<()> {
        let bits = self.ell as u64 * self.n as u64;
        if bits > budget.dp_bits as u64 {
            return Err(over_budget("backward-induction bits ell*n", bits, budget.dp_bits));
        }
        Ok(())
    }
}

/// Distribution of each good block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GoodBlockModel {
    Uniform,
    /// Every good block is uniform on the same `2^k` strings.
    Flat { support: Vec<u64> },
    /// A support per good block.
    PerBlock { supports: BTreeMap<usize, Vec<u64>> },
}

impl GoodBlockModel {
    /// Uniform when `k = n`, otherwise flat on the lexicographically first
    /// `2^k` strings.
    pub fn default_for(spec: &SourceSpec) -> Self {
        if spec.k == spec.n {
            GoodBlockModel::Uniform
        } else {
            GoodBlockModel::Flat { support: (0..1u64 << spec.k).collect() }
        }
    }

    fn check_support(spec: &SourceSpec, s: &[u64]) -> Result<()> {
        if s.len() as u64 != 1u64 << spec.k {
            return Err(invalid("support", format!("{} strings, expected 2^{}", s.len(), spec.k)));
        }
        if s.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("support", "must be strictly increasing"));
        }
        if s.iter().any(|&x| x >> spec.n != 0) {
            return Err(invalid("support", format!("string outside {} bits", spec.n)));
        }
        Ok(())
    }

    pub fn validate(&self, spec: &SourceSpec) -> Result<()> {
        match self {
            GoodBlockModel::Uniform => {
                if spec.k != spec.n {
                    return Err(invalid("goods", "uniform model needs k = n"));
                }
            }
            GoodBlockModel::Flat { support } => Self::check_support(spec, support)?,
            GoodBlockModel::PerBlock { supports } => {
                for b in spec.good_blocks() {
                    let s = supports
                        .get(&b)
                        .ok_or_else(|| invalid("goods", format!("no support for block {b}")))?;
                    Self::check_support(spec, s)?;
                }
            }
        }
        Ok(())
    }

    /// Explicit support of every block, `None` for bad blocks.
    pub fn supports(&self, spec: &SourceSpec) -> Result<Vec<Option<Vec<u64>>>> {
        self.validate(spec)?;
        Ok((1..=spec.ell)
            .map(|b| {
                if spec.is_bad(b) {
                    None
                } else {
                    Some(match self {
                        GoodBlockModel::Uniform => (0..1u64 << spec.n).collect(),
                        GoodBlockModel::Flat { support } => support.clone(),
                        GoodBlockModel::PerBlock { supports } => supports[&b].clone(),
                    })
                }
            })
            .collect())
    }

    /// One draw for good block `block`.
    pub fn sample<R: Rng + ?Sized>(&self, spec: &SourceSpec, block: usize, rng: &mut R) -> u64 {
        match self {
            GoodBlockModel::Uniform => rng.random::<u64>() & mask(spec.n),
            GoodBlockModel::Flat { support } => support[rng.random_range(0..support.len())],
            GoodBlockModel::PerBlock { supports } => {
                let s = &supports[&block];
                s[rng.random_range(0..s.len())]
            }
        }
    }
}

/// Packs blocks into one integer, block 1 in the low bits.
pub fn pack_blocks(blocks: &[u64], n: u32) -> u64 {
    blocks
        .iter()
        .enumerate()
        .fold(0u64, |acc, (j, &b)| acc | (b << (n as usize * j)))
}

pub fn unpack_blocks(packed: u64, ell: usize, n: u32) -> Vec<u64> {
    (0..ell).map(|j| (packed >> (n as usize * j)) & mask(n)).collect()
}

/// A map from `ell` blocks of `n` bits to `m` bits, stored densely.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockFunction {
    pub ell: usize,
    pub n: u32,
    pub m: u32,
    table: Vec<u32>,
}

impl BlockFunction {
    pub fn from_fn(ell: usize, n: u32, m: u32, f: impl Fn(&[u64]) -> u64) -> Result<Self> {
        let bits = ell as u32 * n;
        if bits > crate::dist::MAX_UNIVERSE_BITS || m > 32 {
            return Err(over_budget("block function bits", bits, crate::dist::MAX_UNIVERSE_BITS));
        }
        let mut table = Vec::with_capacity(1usize << bits);
        for x in 0..1u64 << bits {
            let y = f(&unpack_blocks(x, ell, n));
            if y >> m != 0 {
                return Err(invalid("f", format!("output {y} outside {m} bits")));
            }
            table.push(y as u32);
        }
        Ok(BlockFunction { ell, n, m, table })
    }

    /// Views a Boolean function on `ell * n` inputs as a block function.
    pub fn from_boolean(f: &BooleanFunction, ell: usize, n: u32) -> Result<Self> {
        if f.ell() != ell as u32 * n {
            return Err(Error::WidthMismatch { expected: ell as u32 * n, found: f.ell() });
        }
        let table = (0..f.size() as u64).map(|x| f.get(x) as u32).collect();
        Ok(BlockFunction { ell, n, m: 1, table })
    }

    pub fn eval_packed(&self, x: u64) -> u64 {
        self.table[x as usize] as u64
    }

    pub fn eval(&self, blocks: &[u64]) -> u64 {
        self.eval_packed(pack_blocks(blocks, self.n))
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    pub(crate) fn check_spec(&self, spec: &SourceSpec) -> Result<()> {
        if spec.ell != self.ell || spec.n != self.n {
            return Err(Error::WidthMismatch {
                expected: self.ell as u32 * self.n,
                found: spec.total_bits(),
            });
        }
        Ok(())
    }
}

/// Fills the bad blocks of `values` by querying the adversary in order.
/// Entries of `values` at bad positions are ignored.
pub fn complete_source(
    spec: &SourceSpec,
    adv: &dyn OnlineAdversary,
    values: &[u64],
) -> Result<Vec<u64>> {
    if values.len() != spec.ell {
        return Err(invalid("values", format!("{} blocks for ell {}", values.len(), spec.ell)));
    }
    let mut blocks = Vec::with_capacity(spec.ell);
    for j in 1..=spec.ell {
        let v = if spec.is_bad(j) {
            let v = adv.respond(j, &blocks)?;
            if v >> spec.n != 0 {
                return Err(Error::AdversaryOutOfWidth { block: j, value: v, width: spec.n });
            }
            v
        } else {
            values[j - 1]
        };
        blocks.push(v);
    }
    Ok(blocks)
}

/// One draw of the source.
pub fn sample_source<R: Rng + ?Sized>(
    spec: &SourceSpec,
    adv: &dyn OnlineAdversary,
    goods: &GoodBlockModel,
    rng: &mut R,
) -> Result<Vec<u64>> {
    let values: Vec<u64> = (1..=spec.ell)
        .map(|j| if spec.is_bad(j) { 0 } else { goods.sample(spec, j, rng) })
        .collect();
    complete_source(spec, adv, &values)
}

/// Calls `visit(weight, good_values)` for every assignment of the good
/// blocks; bad positions hold 0.
pub fn for_each_good_assignment(
    spec: &SourceSpec,
    supports: &[Option<Vec<u64>>],
    mut visit: impl FnMut(f64, &[u64]) -> Result<()>,
) -> Result<()> {
    let radices: Vec<usize> = supports.iter().map(|s| s.as_ref().map_or(1, |s| s.len())).collect();
    let total: f64 = radices.iter().map(|&r| r as f64).product();
    let weight = 1.0 / total;
    let mut digits = vec![0usize; spec.ell];
    let mut values = vec![0u64; spec.ell];
    loop {
        for j in 0..spec.ell {
            values[j] = supports[j].as_ref().map_or(0, |s| s[digits[j]]);
        }
        visit(weight, &values)?;
        let mut j = 0;
        loop {
            if j == spec.ell {
                return Ok(());
            }
            digits[j] += 1;
            if digits[j] < radices[j] {
                break;
            }
            digits[j] = 0;
            j += 1;
        }
    }
}

fn assignment_count(supports: &[Option<Vec<u64>>]) -> f64 {
    supports.iter().map(|s| s.as_ref().map_or(1.0, |s| s.len() as f64)).product()
}

fn check_assignments(supports: &[Option<Vec<u64>>], budget: &Budget) -> Result<()> {
    let count = assignment_count(supports);
    if count > (1u64 << budget.dp_bits) as f64 {
        return Err(over_budget("good-block assignments", count, 1u64 << budget.dp_bits));
    }
    Ok(())
}

/// Exact law of `map(X)` under a fixed adversary.
pub fn exact_output_distribution(
    spec: &SourceSpec,
    goods: &GoodBlockModel,
    adv: &dyn OnlineAdversary,
    out_bits: u32,
    map: impl Fn(&[u64]) -> u64,
    budget: &Budget,
) -> Result<Distribution> {
    let supports = goods.supports(spec)?;
    check_assignments(&supports, budget)?;
    if out_bits > crate::dist::MAX_UNIVERSE_BITS {
        return Err(over_budget("output bits", out_bits, crate::dist::MAX_UNIVERSE_BITS));
    }
    let mut probs = vec![0.0; 1usize << out_bits];
    for_each_good_assignment(spec, &supports, |w, values| {
        let blocks = complete_source(spec, adv, values)?;
        let y = map(&blocks);
        if y >> out_bits != 0 {
            return Err(invalid("map", format!("output {y} outside {out_bits} bits")));
        }
        probs[y as usize] += w;
        Ok(())
    })?;
    Distribution::from_weights(out_bits, probs)
}

/// Exact `E[f(X)]` under a fixed adversary.
pub fn exact_expectation(
    f: &BooleanFunction,
    spec: &SourceSpec,
    goods: &GoodBlockModel,
    adv: &dyn OnlineAdversary,
    budget: &Budget,
) -> Result<f64> {
    if f.ell() != spec.total_bits() {
        return Err(Error::WidthMismatch { expected: spec.total_bits(), found: f.ell() });
    }
    let d = exact_output_distribution(
        spec,
        goods,
        adv,
        1,
        |b| f.get(pack_blocks(b, spec.n)) as u64,
        budget,
    )?;
    Ok(d.prob(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trial_rng;

    #[test]
    fn spec_validation() {
        assert!(SourceSpec::new(3, 1, 1, [3]).is_ok());
        assert!(SourceSpec::new(3, 1, 1, [4]).is_err());
        assert!(SourceSpec::new(3, 1, 2, [1]).is_err());
        assert!(SourceSpec::new(2, 1, 1, [1, 2]).is_err());
        let json = r#"{"ell":3,"n":2,"g":2,"k":1,"bad_set":[2]}"#;
        let s: SourceSpec = serde_json::from_str(json).unwrap();
        assert_eq!(s, SourceSpec::new(3, 2, 1, [2]).unwrap());
        let bad = r#"{"ell":3,"n":2,"g":3,"k":1,"bad_set":[2]}"#;
        assert!(serde_json::from_str::<SourceSpec>(bad).is_err());
    }

    #[test]
    fn packing_round_trip() {
        let b = vec![3, 0, 2, 1];
        let p = pack_blocks(&b, 2);
        assert_eq!(p, 3 | (2 << 4) | (1 << 6));
        assert_eq!(unpack_blocks(p, 4, 2), b);
    }

    #[test]
    fn adversary_width_is_checked() {
        let spec = SourceSpec::new(2, 1, 1, [2]).unwrap();
        let adv = ConstantAdversary::new(2);
        let err = sample_source(&spec, &adv, &GoodBlockModel::Uniform, &mut trial_rng(1, 0));
        assert!(matches!(err, Err(Error::AdversaryOutOfWidth { block: 2, value: 2, .. })));
    }

    #[test]
    fn default_goods_are_lexicographic() {
        let spec = SourceSpec::new(2, 3, 1, []).unwrap();
        assert_eq!(
            GoodBlockModel::default_for(&spec),
            GoodBlockModel::Flat { support: vec![0, 1] }
        );
        let bad = GoodBlockModel::Flat { support: vec![0, 1, 2] };
        assert!(bad.validate(&spec).is_err());
    }

    #[test]
    fn copy_adversary_distribution() {
        // Block 2 copies block 1: the pair is (b, b) for a uniform bit b.
        let spec = SourceSpec::new(2, 1, 1, [2]).unwrap();
        let adv = FnAdversary::new(|_, prefix: &[u64]| prefix[0]);
        let d = exact_output_distribution(
            &spec,
            &GoodBlockModel::Uniform,
            &adv,
            2,
            |b| pack_blocks(b, 1),
            &Budget::default(),
        )
        .unwrap();
        assert_eq!(d.probs(), &[0.5, 0.0, 0.0, 0.5]);
    }
}
