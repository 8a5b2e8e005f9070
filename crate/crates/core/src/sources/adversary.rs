// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{pack_blocks, GoodBlockModel, SourceSpec};
use crate::dist::mask;
use crate::error::{invalid, Error, Result};

/// Writes bad blocks. `prefix` holds blocks `1..block` and nothing later.
pub trait OnlineAdversary: Sync {
    fn respond(&self, block: usize, prefix: &[u64]) -> Result<u64>;
}

/// Deterministic policy stored as one table per bad block, indexed by the
/// packed prefix.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TableAdversary {
    pub n: u32,
    pub tables: BTreeMap<usize, Vec<u64>>,
}

impl TableAdversary {
    pub fn new(n: u32) -> Self {
        TableAdversary { n, tables: BTreeMap::new() }
    }
}

impl OnlineAdversary for TableAdversary {
    fn respond(&self, block: usize, prefix: &[u64]) -> Result<u64> {
        let table = self
            .tables
            .get(&block)
            .ok_or_else(|| invalid("adversary", format!("no table for block {block}")))?;
        let idx = pack_blocks(prefix, self.n) as usize;
        table
            .get(idx)
            .copied()
            .ok_or_else(|| invalid("adversary", format!("prefix {idx} beyond table of block {block}")))
    }
}

/// Writes the same value into every bad block.
#[derive(Clone, Copy, Debug)]
pub struct ConstantAdversary {
    pub value: u64,
}

impl ConstantAdversary {
    pub fn new(value: u64) -> Self {
        ConstantAdversary { value }
    }
}

impl OnlineAdversary for ConstantAdversary {
    fn respond(&self, _block: usize, _prefix: &[u64]) -> Result<u64> {
        Ok(self.value)
    }
}

/// Wraps a closure.
pub struct FnAdversary<F> {
    f: F,
}

impl<F: Fn(usize, &[u64]) -> u64 + Sync> FnAdversary<F> {
    pub fn new(f: F) -> Self {
        FnAdversary { f }
    }
}

impl<F: Fn(usize, &[u64]) -> u64 + Sync> OnlineAdversary for FnAdversary<F> {
    fn respond(&self, block: usize, prefix: &[u64]) -> Result<u64> {
        Ok((self.f)(block, prefix))
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A seeded but otherwise arbitrary function of the prefix.
#[derive(Clone, Copy, Debug)]
pub struct UniformRandomAdversary {
    pub n: u32,
    pub seed: u64,
}

impl OnlineAdversary for UniformRandomAdversary {
    fn respond(&self, block: usize, prefix: &[u64]) -> Result<u64> {
        let mut h = splitmix(self.seed ^ splitmix(block as u64));
        for &b in prefix {
            h = splitmix(h ^ b);
        }
        Ok(h & mask(self.n))
    }
}

/// Myopic heuristic: each bad block takes the value that maximises (or
/// minimises) `E f` assuming every later block is drawn honestly.
pub struct CrowdingAdversary {
    n: u32,
    maximise: bool,
    // levels[j][p] = E f given the packed prefix p of j blocks.
    levels: Vec<Vec<f64>>,
}

impl CrowdingAdversary {
    pub fn new(
        f: &crate::boolfn::BooleanFunction,
        spec: &SourceSpec,
        goods: &GoodBlockModel,
        maximise: bool,
        budget: &crate::budget::Budget,
    ) -> Result<Self> {
        spec.check_dp_bits(budget)?;
        if f.ell() != spec.total_bits() {
            return Err(Error::WidthMismatch { expected: spec.total_bits(), found: f.ell() });
        }
        let supports = goods.supports(spec)?;
        let n = spec.n;
        let mut cur: Vec<f64> = (0..f.size() as u64).map(|x| f.get(x) as u8 as f64).collect();
        let mut levels = vec![Vec::new(); spec.ell + 1];
        for j in (1..=spec.ell).rev() {
            let chunk = 1usize << (n as usize * (j - 1));
            let next: Vec<f64> = match &supports[j - 1] {
                Some(s) => (0..chunk)
                    .map(|p| s.iter().map(|&v| cur[v as usize * chunk + p]).sum::<f64>() / s.len() as f64)
                    .collect(),
                None => (0..chunk)
                    .map(|p| (0..1usize << n).map(|v| cur[v * chunk + p]).sum::<f64>() / (1u64 << n) as f64)
                    .collect(),
            };
            levels[j] = std::mem::replace(&mut cur, next);
        }
        levels[0] = cur;
        Ok(CrowdingAdversary { n, maximise, levels })
    }
}

impl OnlineAdversary for CrowdingAdversary {
    fn respond(&self, block: usize, prefix: &[u64]) -> Result<u64> {
        let level = self
            .levels
            .get(block)
            .ok_or_else(|| invalid("block", format!("{block} beyond the source")))?;
        let chunk = 1usize << (self.n as usize * (block - 1));
        let p = pack_blocks(prefix, self.n) as usize;
        let mut best = (0u64, level[p]);
        for v in 1..1u64 << self.n {
            let val = level[v as usize * chunk + p];
            let better = if self.maximise { val > best.1 } else { val < best.1 };
            if better {
                best = (v, val);
            }
        }
        Ok(best.0)
    }
}

/// Deterministic policy that reads only the good blocks of the prefix.
/// Table `j` is indexed by the mixed-radix position of the good values
/// before block `j` within their supports, earliest block least
/// significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoodPrefixAdversary {
    pub(crate) supports: Vec<Option<Vec<u64>>>,
    pub(crate) tables: BTreeMap<usize, Vec<u64>>,
}

impl GoodPrefixAdversary {
    /// Table sizes per bad block.
    pub(crate) fn table_sizes(supports: &[Option<Vec<u64>>]) -> BTreeMap<usize, usize> {
        let mut size = 1usize;
        let mut out = BTreeMap::new();
        for (j, s) in supports.iter().enumerate() {
            match s {
                Some(s) => size = size.saturating_mul(s.len()),
                None => {
                    out.insert(j + 1, size);
                }
            }
        }
        out
    }

    pub fn random<R: Rng + ?Sized>(spec: &SourceSpec, goods: &GoodBlockModel, rng: &mut R) -> Result<Self> {
        let supports = goods.supports(spec)?;
        let tables = Self::table_sizes(&supports)
            .into_iter()
            .map(|(j, size)| (j, (0..size).map(|_| rng.random::<u64>() & mask(spec.n)).collect()))
            .collect();
        Ok(GoodPrefixAdversary { supports, tables })
    }

    pub fn tables(&self) -> &BTreeMap<usize, Vec<u64>> {
        &self.tables
    }
}

impl OnlineAdversary for GoodPrefixAdversary {
    fn respond(&self, block: usize, prefix: &[u64]) -> Result<u64> {
        let mut idx = 0usize;
        let mut weight = 1usize;
        for (j, &v) in prefix.iter().enumerate() {
            if let Some(s) = &self.supports[j] {
                let pos = s
                    .binary_search(&v)
                    .map_err(|_| invalid("prefix", format!("block {} value {v} outside support", j + 1)))?;
                idx += pos * weight;
                weight *= s.len();
            }
        }
        let table = self
            .tables
            .get(&block)
            .ok_or_else(|| invalid("adversary", format!("no table for block {block}")))?;
        Ok(table[idx])
    }
}
