// SPDX-License-Identifier: Apache-2.0

//! Bit strings, dense distributions over `{0,1}^m`, flat sources and the
//! entropy measures used throughout the crate.

use std::fmt;

use itertools::Itertools;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{invalid, over_budget, Error, Result};

/// Hard ceiling on the universe of a dense distribution.
pub const MAX_UNIVERSE_BITS: u32 = 24;

const SUM_TOLERANCE: f64 = 1e-12;

/// A string of at most 63 bits. The first bit of the string is the most
/// significant bit of `value`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BitString {
    value: u64,
    width: u32,
}

impl BitString {
    pub fn new(value: u64, width: u32) -> Result<Self> {
        if width > 63 {
            return Err(invalid("width", format!("{width} exceeds 63")));
        }
        if value >> width != 0 {
            return Err(invalid("value", format!("{value} does not fit in {width} bits")));
        }
        Ok(BitString { value, width })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// Bit `i` counted from the left, 0-based.
    pub fn bit(&self, i: u32) -> bool {
        assert!(i < self.width);
        (self.value >> (self.width - 1 - i)) & 1 == 1
    }

    /// The leftmost `len` bits.
    pub fn prefix(&self, len: u32) -> Result<Self> {
        if len > self.width {
            return Err(invalid("len", format!("prefix {len} longer than {}", self.width)));
        }
        Ok(BitString {
            value: prefix_bits(self.value, self.width, len),
            width: len,
        })
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &BitString) -> Result<Self> {
        BitString::new(
            (self.value << other.width) | other.value,
            self.width + other.width,
        )
    }

    /// Splits into a left half of `ceil(w/2)` bits and a right half of
    /// `floor(w/2)` bits.
    pub fn split_halves(&self) -> (BitString, BitString) {
        let right = self.width / 2;
        let left = self.width - right;
        (
            BitString { value: self.value >> right, width: left },
            BitString { value: self.value & mask(right), width: right },
        )
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.width {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Low `bits` ones.
pub fn mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// The leftmost `len` bits of a `width`-bit value.
pub fn prefix_bits(value: u64, width: u32, len: u32) -> u64 {
    debug_assert!(len <= width);
    if len == 0 {
        0
    } else {
        value >> (width - len)
    }
}

/// Concatenates equal-width blocks, earliest block leftmost.
pub fn concat_blocks(blocks: &[u64], width: u32) -> u64 {
    blocks.iter().fold(0u64, |acc, &b| (acc << width) | b)
}

fn neumaier_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// A probability vector over `{0,1}^width`, indexed by the value of the
/// string.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    width: u32,
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(width: u32, probs: Vec<f64>) -> Result<Self> {
        if width > MAX_UNIVERSE_BITS {
            return Err(over_budget("universe bits", width, MAX_UNIVERSE_BITS));
        }
        if probs.len() != 1usize << width {
            return Err(Error::InvalidDistribution(format!(
                "{} entries for width {width}",
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("entry {p} is not a probability")));
        }
        let total = neumaier_sum(&probs);
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
        }
        Ok(Distribution { width, probs })
    }

    /// Normalises non-negative weights.
    pub fn from_weights(width: u32, weights: Vec<f64>) -> Result<Self> {
        let total = neumaier_sum(&weights);
        if total <= 0.0 {
            return Err(Error::EmptyDistribution);
        }
        Distribution::new(width, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(width: u32) -> Result<Self> {
        let size = 1usize << width.min(MAX_UNIVERSE_BITS + 1);
        Distribution::new(width, vec![1.0 / size as f64; size])
    }

    pub fn point_mass(width: u32, value: u64) -> Result<Self> {
        if width > MAX_UNIVERSE_BITS {
            return Err(over_budget("universe bits", width, MAX_UNIVERSE_BITS));
        }
        if value >> width != 0 {
            return Err(invalid("value", format!("{value} outside {width} bits")));
        }
        let mut probs = vec![0.0; 1usize << width];
        probs[value as usize] = 1.0;
        Distribution::new(width, probs)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, value: u64) -> f64 {
        self.probs[value as usize]
    }

    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    pub fn min_entropy(&self) -> f64 {
        min_entropy_of(&self.probs).expect("a validated distribution has positive mass")
    }

    /// Push-forward through `map`, which must land in `out_width` bits.
    pub fn map(&self, out_width: u32, map: impl Fn(u64) -> u64) -> Result<Distribution> {
        if out_width > MAX_UNIVERSE_BITS {
            return Err(over_budget("universe bits", out_width, MAX_UNIVERSE_BITS));
        }
        let mut out = vec![0.0; 1usize << out_width];
        for (x, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                let y = map(x as u64);
                if y >> out_width != 0 {
                    return Err(invalid("map", format!("image {y} outside {out_width} bits")));
                }
                out[y as usize] += p;
            }
        }
        Distribution::from_weights(out_width, out)
    }
}

impl Serialize for Distribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let probs: Vec<String> = self.probs.iter().map(|p| format!("{p:.16e}")).collect();
        let mut st = serializer.serialize_struct("Distribution", 2)?;
        st.serialize_field("width", &self.width)?;
        st.serialize_field("probs", &probs)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Distribution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            width: u32,
            probs: Vec<String>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let probs = raw
            .probs
            .iter()
            .map(|s| s.parse::<f64>().map_err(de::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Distribution::new(raw.width, probs).map_err(de::Error::custom)
    }
}

/// `-log2 max_x p(x)` of a raw probability vector.
pub fn min_entropy_of(probs: &[f64]) -> Result<f64> {
    let max = probs.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return Err(Error::EmptyDistribution);
    }
    Ok(-max.log2())
}

/// Total variation distance.
pub fn statistical_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.width != q.width {
        return Err(Error::WidthMismatch {
            expected: p.width,
            found: q.width,
        });
    }
    let diffs: Vec<f64> = p
        .probs
        .iter()
        .zip(&q.probs)
        .map(|(a, b)| (a - b).abs())
        .collect();
    Ok(0.5 * neumaier_sum(&diffs))
}

/// Distance from the uniform distribution on the same universe.
pub fn distance_from_uniform(p: &Distribution) -> f64 {
    let u = 1.0 / p.probs.len() as f64;
    let diffs: Vec<f64> = p.probs.iter().map(|a| (a - u).abs()).collect();
    0.5 * neumaier_sum(&diffs)
}

/// Smallest cap `t` such that capping every atom at `t` removes at most
/// `eps` of mass, floored at `2^-m`.
pub(crate) fn smoothing_cap(probs: &[f64], eps: f64) -> f64 {
    let floor = 1.0 / probs.len() as f64;
    let mut sorted: Vec<f64> = probs.iter().cloned().filter(|&p| p > 0.0).collect();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    // On [p_(j+1), p_(j)] the removed mass is S_j - j*t.
    let mut prefix = 0.0;
    let mut cap = 0.0;
    for j in 0..sorted.len() {
        prefix += sorted[j];
        let t = (prefix - eps) / (j + 1) as f64;
        let next = sorted.get(j + 1).copied().unwrap_or(0.0);
        if t >= next {
            cap = t;
            break;
        }
    }
    cap.max(floor)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(invalid("eps", format!("{eps} outside [0, 1)")));
    }
    Ok(())
}

/// `max { H_inf(Y) : |Y - p| <= eps }` over distributions on the same
/// universe.
pub fn smooth_min_entropy(p: &Distribution, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    if eps == 0.0 {
        return Ok(p.min_entropy());
    }
    Ok(-smoothing_cap(&p.probs, eps).log2())
}

/// Smooth min-entropy together with a distribution attaining it.
pub fn smoothing_witness(p: &Distribution, eps: f64) -> Result<(f64, Distribution)> {
    check_eps(eps)?;
    if eps == 0.0 {
        return Ok((p.min_entropy(), p.clone()));
    }
    let cap = smoothing_cap(&p.probs, eps);
    let mut probs = p.probs.clone();
    let mut removed = 0.0;
    for q in probs.iter_mut() {
        if *q > cap {
            removed += *q - cap;
            *q = cap;
        }
    }
    for q in probs.iter_mut() {
        if removed <= 0.0 {
            break;
        }
        let room = (cap - *q).max(0.0).min(removed);
        *q += room;
        removed -= room;
    }
    let witness = Distribution::from_weights(p.width, probs)?;
    Ok((-cap.log2(), witness))
}

/// The uniform distribution on a set of `2^k` strings of `n` bits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatSource {
    pub width: u32,
    pub support: Vec<u64>,
}

impl FlatSource {
    pub fn new(width: u32, mut support: Vec<u64>) -> Result<Self> {
        support.sort_unstable();
        support.dedup();
        if support.is_empty() || !support.len().is_power_of_two() {
            return Err(invalid("support", format!("size {} is not a power of two", support.len())));
        }
        if support.iter().any(|&x| x >> width != 0) {
            return Err(invalid("support", format!("element outside {width} bits")));
        }
        Ok(FlatSource { width, support })
    }

    /// The lexicographically first `2^k` strings.
    pub fn lexicographic(width: u32, k: u32) -> Result<Self> {
        if k > width {
            return Err(invalid("k", format!("{k} exceeds width {width}")));
        }
        FlatSource::new(width, (0..1u64 << k).collect())
    }

    pub fn min_entropy(&self) -> f64 {
        (self.support.len() as f64).log2()
    }

    pub fn to_distribution(&self) -> Result<Distribution> {
        if self.width > MAX_UNIVERSE_BITS {
            return Err(over_budget("universe bits", self.width, MAX_UNIVERSE_BITS));
        }
        let mut probs = vec![0.0; 1usize << self.width];
        let w = 1.0 / self.support.len() as f64;
        for &x in &self.support {
            probs[x as usize] = w;
        }
        Distribution::new(self.width, probs)
    }
}

/// `C(n, k)`, or `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i + 1) as u128;
    }
    Some(acc)
}

/// Number of flat `k`-sources on `n` bits, as a display string when it
/// overflows.
pub fn flat_source_count(n: u32, k: u32) -> Result<u128> {
    if k > n || n > 63 {
        return Err(invalid("k", format!("need k <= n <= 63, got k={k}, n={n}")));
    }
    binomial(1u64 << n, 1u64 << k).ok_or_else(|| {
        over_budget(
            "flat sources",
            format!("C(2^{n}, 2^{k}) > 2^128"),
            "u128",
        )
    })
}

/// Every flat `k`-source on `n` bits, supports in lexicographic order.
pub fn enumerate_flat_sources(
    n: u32,
    k: u32,
    budget: &Budget,
) -> Result<impl Iterator<Item = FlatSource>> {
    let count = flat_source_count(n, k)?;
    if count > budget.flat_sources as u128 {
        return Err(over_budget("flat sources", count, budget.flat_sources));
    }
    Ok((0..1u64 << n)
        .combinations(1usize << k)
        .map(move |support| FlatSource { width: n, support }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(width: u32, probs: &[f64]) -> Distribution {
        Distribution::new(width, probs.to_vec()).unwrap()
    }

    #[test]
    fn bitstring_prefix_and_halves() {
        let b = BitString::new(0b10110, 5).unwrap();
        assert_eq!(b.prefix(2).unwrap().value(), 0b10);
        let (l, r) = b.split_halves();
        assert_eq!((l.value(), l.width()), (0b101, 3));
        assert_eq!((r.value(), r.width()), (0b10, 2));
        assert_eq!(b.to_string(), "10110");
        assert!(BitString::new(4, 2).is_err());
        assert!(BitString::new(0, 64).is_err());
    }

    #[test]
    fn distance_examples() {
        let p = dist(1, &[1.0, 0.0]);
        let q = dist(1, &[0.0, 1.0]);
        assert_eq!(statistical_distance(&p, &q).unwrap(), 1.0);
        assert_eq!(statistical_distance(&p, &p).unwrap(), 0.0);
        let u2 = Distribution::uniform(2).unwrap();
        assert!(matches!(
            statistical_distance(&p, &u2),
            Err(Error::WidthMismatch { .. })
        ));
    }

    #[test]
    fn min_entropy_examples() {
        assert_eq!(Distribution::uniform(3).unwrap().min_entropy(), 3.0);
        assert_eq!(Distribution::point_mass(3, 5).unwrap().min_entropy(), 0.0);
        assert!(matches!(min_entropy_of(&[0.0, 0.0]), Err(Error::EmptyDistribution)));
    }

    #[test]
    fn smooth_examples() {
        let p = dist(1, &[1.0, 0.0]);
        assert_eq!(smooth_min_entropy(&p, 0.5).unwrap(), 1.0);
        let q = dist(1, &[0.6, 0.4]);
        assert!((smooth_min_entropy(&q, 0.1).unwrap() - 1.0).abs() < 1e-12);
        assert!(smooth_min_entropy(&q, 1.0).is_err());
        assert!(smooth_min_entropy(&q, -0.1).is_err());
    }

    #[test]
    fn smoothing_against_grid_oracle() {
        // Oracle: scan Y = (y, 1-y) on a fine grid.
        for &(a, eps) in &[(0.9, 0.05), (0.7, 0.3), (0.55, 0.01), (0.8, 0.25)] {
            let p = dist(1, &[a, 1.0 - a]);
            let mut best = f64::INFINITY;
            for i in 0..=100_000 {
                let y = i as f64 / 100_000.0;
                if (y - a).abs() <= eps + 1e-12 {
                    best = best.min(y.max(1.0 - y));
                }
            }
            let got = smooth_min_entropy(&p, eps).unwrap();
            assert!((got - (-best.log2())).abs() < 1e-4, "a={a} eps={eps}");
        }
    }

    #[test]
    fn witness_attains_value() {
        let p = dist(2, &[0.5, 0.3, 0.15, 0.05]);
        let (h, w) = smoothing_witness(&p, 0.2).unwrap();
        assert!(statistical_distance(&p, &w).unwrap() <= 0.2 + 1e-12);
        assert!((w.min_entropy() - h).abs() < 1e-12);
        // Cap 0.3 removes exactly 0.2 from the top atom.
        assert!((h - (-(0.3f64).log2())).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let p = dist(2, &[0.1, 0.2, 0.3, 0.4]);
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.starts_with("{\"width\":2,\"probs\":[\"1.0000000000000001e-1\""));
        let back: Distribution = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn flat_enumeration() {
        let all: Vec<_> = enumerate_flat_sources(2, 1, &Budget::default()).unwrap().collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0].support, vec![0, 1]);
        assert_eq!(all[5].support, vec![2, 3]);
        let tight = Budget { flat_sources: 5, ..Budget::default() };
        match enumerate_flat_sources(2, 1, &tight) {
            Err(Error::BudgetExceeded { needed, .. }) => assert_eq!(needed, "6"),
            _ => panic!("expected budget error"),
        }
    }
}
