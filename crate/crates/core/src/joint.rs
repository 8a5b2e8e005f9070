// SPDX-License-Identifier: Apache-2.0

//! Joint distributions over tuples of bit strings and conditional
//! min-entropy.

use crate::dist::{mask, Distribution, MAX_UNIVERSE_BITS};
use crate::error::{invalid, over_budget, Error, Result};

/// A distribution over `(Z_0, ..., Z_{c-1})`. Component `j` occupies the
/// bits starting at `sum_{i<j} widths[i]` of the index.
#[derive(Clone, Debug, PartialEq)]
pub struct Joint {
    widths: Vec<u32>,
    probs: Vec<f64>,
}

impl Joint {
    pub fn new(widths: Vec<u32>, probs: Vec<f64>) -> Result<Self> {
        let total: u32 = widths.iter().sum();
        Distribution::new(total, probs.clone())?;
        Ok(Joint { widths, probs })
    }

    pub fn from_weights(widths: Vec<u32>, weights: Vec<f64>) -> Result<Self> {
        let total: u32 = widths.iter().sum();
        let d = Distribution::from_weights(total, weights)?;
        Ok(Joint { widths, probs: d.probs().to_vec() })
    }

    pub fn widths(&self) -> &[u32] {
        &self.widths
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    fn offset(&self, c: usize) -> u32 {
        self.widths[..c].iter().sum()
    }

    fn check(&self, comps: &[usize]) -> Result<()> {
        for &c in comps {
            if c >= self.widths.len() {
                return Err(Error::IndexOutOfRange { index: c + 1, len: self.widths.len() });
            }
        }
        Ok(())
    }

    /// Packs the listed components of `index` into one value, first listed
    /// component in the low bits.
    fn pack(&self, index: usize, comps: &[usize]) -> usize {
        let mut out = 0usize;
        let mut shift = 0u32;
        for &c in comps {
            let v = (index >> self.offset(c)) as u64 & mask(self.widths[c]);
            out |= (v as usize) << shift;
            shift += self.widths[c];
        }
        out
    }

    /// Marginal on `comps` as a joint over those components.
    pub fn marginal(&self, comps: &[usize]) -> Result<Joint> {
        self.check(comps)?;
        let widths: Vec<u32> = comps.iter().map(|&c| self.widths[c]).collect();
        let total: u32 = widths.iter().sum();
        if total > MAX_UNIVERSE_BITS {
            return Err(over_budget("universe bits", total, MAX_UNIVERSE_BITS));
        }
        let mut probs = vec![0.0; 1usize << total];
        for (i, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                probs[self.pack(i, comps)] += p;
            }
        }
        Ok(Joint { widths, probs })
    }

    pub fn to_distribution(&self) -> Distribution {
        Distribution::new(self.widths.iter().sum(), self.probs.clone())
            .expect("joint already validated")
    }

    /// `H_inf` of the components `target`.
    pub fn min_entropy(&self, target: &[usize]) -> Result<f64> {
        Ok(self.marginal(target)?.to_distribution().min_entropy())
    }

    fn table(&self, target: &[usize], given: &[usize]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check(target)?;
        self.check(given)?;
        if target.iter().any(|t| given.contains(t)) {
            return Err(invalid("target", "overlaps the conditioning components"));
        }
        let gbits: u32 = given.iter().map(|&c| self.widths[c]).sum();
        let mut mass = vec![0.0; 1usize << gbits];
        let mut best = vec![0.0f64; 1usize << gbits];
        let both: Vec<usize> = given.iter().chain(target).cloned().collect();
        let joint = self.marginal(&both)?;
        for (i, &p) in joint.probs.iter().enumerate() {
            let g = i & (mask(gbits) as usize);
            mass[g] += p;
            best[g] = best[g].max(p);
        }
        Ok((mass, best))
    }

    /// `-log2 E_b max_a Pr[A = a | B = b]`.
    pub fn avg_conditional_min_entropy(&self, target: &[usize], given: &[usize]) -> Result<f64> {
        let (_, best) = self.table(target, given)?;
        // E_b max_a Pr[a | b] = sum_b max_a Pr[a, b].
        let guess: f64 = best.iter().sum();
        Ok(-guess.log2())
    }

    /// For every value `b` of `given` with positive mass, the pair
    /// `(Pr[B = b], H_inf(A | B = b))`.
    pub fn conditional_min_entropies(
        &self,
        target: &[usize],
        given: &[usize],
    ) -> Result<Vec<(f64, f64)>> {
        let (mass, best) = self.table(target, given)?;
        Ok(mass
            .iter()
            .zip(&best)
            .filter(|(m, _)| **m > 0.0)
            .map(|(m, b)| (*m, -(b / m).log2()))
            .collect())
    }

    /// Number of values of `comps` with positive mass.
    pub fn support_size(&self, comps: &[usize]) -> Result<usize> {
        Ok(self.marginal(comps)?.probs.iter().filter(|&&p| p > 0.0).count())
    }
}
