// SPDX-License-Identifier: Apache-2.0

//! Seeded extractors and condensers, two-source extractors, and exact
//! verifiers that check them against every flat source of given entropy.

mod chain;
mod search;
mod verify;

pub use chain::{
    average_chain_rule, chain_rule_mass, control_bits_check, worst_case_fixing, AverageChain, ControlBitsReport, FixingReport,
};
pub use search::{search_object, SearchSpec, SearchedObject, Verified, DEFAULT_TRIES};
pub use verify::{
    verify_seeded_condenser, verify_seeded_extractor, verify_two_source_extractor, worst_over_flat,
    Property, VerificationReport,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{mask, MAX_UNIVERSE_BITS};
use crate::error::{invalid, over_budget, Result};
use crate::gf2::Gf2n;
use crate::trial_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeededWidths {
    pub n: u32,
    pub d: u32,
    pub m: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeededKind {
    /// `d = n + m - 1` seed bits define an `m x n` Toeplitz matrix.
    LhlToeplitz,
    /// `d = n`; the low `m` bits of `x * s` in `GF(2^n)`.
    Gf2xMultiply,
    /// Explicit table indexed by `(x << d) | s`.
    Table { table: Vec<u32> },
    /// Table drawn at random and kept because it verified.
    Searched { seed: u64, trial: u64, table: Vec<u32> },
}

/// A function `{0,1}^n x {0,1}^d -> {0,1}^m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeededMap {
    pub widths: SeededWidths,
    #[serde(flatten)]
    pub kind: SeededKind,
}

fn random_table(bits: u32, m: u32, seed: u64, trial: u64) -> Result<Vec<u32>> {
    if bits > MAX_UNIVERSE_BITS {
        return Err(over_budget("table input bits", bits, MAX_UNIVERSE_BITS));
    }
    let mut rng = trial_rng(seed, trial);
    Ok((0..1usize << bits).map(|_| (rng.random::<u64>() & mask(m)) as u32).collect())
}

/// FNV-1a over the table entries.
fn table_digest(table: &[u32]) -> u64 {
    table.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &v| {
        v.to_le_bytes().iter().fold(h, |h, &b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
    })
}

fn check_table(table: &[u32], in_bits: u32, m: u32) -> Result<()> {
    if in_bits > MAX_UNIVERSE_BITS {
        return Err(over_budget("table input bits", in_bits, MAX_UNIVERSE_BITS));
    }
    if table.len() != 1usize << in_bits {
        return Err(invalid("table", format!("{} entries, expected 2^{in_bits}", table.len())));
    }
    if table.iter().any(|&y| (y as u64) >> m != 0) {
        return Err(invalid("table", format!("entry outside {m} bits")));
    }
    Ok(())
}

impl SeededMap {
    pub fn validate(&self) -> Result<()> {
        let SeededWidths { n, d, m } = self.widths;
        match &self.kind {
            SeededKind::LhlToeplitz => {
                if n == 0 || m == 0 || m > n || n + m - 1 != d || d > 64 {
                    return Err(invalid("widths", "Toeplitz needs 1 <= m <= n and d = n + m - 1 <= 64"));
                }
            }
            SeededKind::Gf2xMultiply => {
                if d != n || m == 0 || m > n || n > 64 {
                    return Err(invalid("widths", "field multiplication needs d = n <= 64 and m <= n"));
                }
            }
            SeededKind::Table { table } | SeededKind::Searched { table, .. } => check_table(table, n + d, m)?,
        }
        Ok(())
    }

    pub fn eval(&self, x: u64, s: u64) -> u64 {
        let SeededWidths { n, d, m } = self.widths;
        match &self.kind {
            SeededKind::LhlToeplitz => {
                // Row r, column c holds seed bit r - c + n - 1.
                (0..m).fold(0u64, |acc, r| {
                    let row = (0..n).fold(0u64, |row, c| row | (((s >> (r + n - 1 - c)) & 1) << c));
                    acc | ((((x & row).count_ones() & 1) as u64) << r)
                })
            }
            SeededKind::Gf2xMultiply => {
                let f = Gf2n::new(n).expect("validated");
                f.mul(x, s) & mask(m)
            }
            SeededKind::Table { table } | SeededKind::Searched { table, .. } => table[((x << d) | s) as usize] as u64,
        }
    }

    /// Uniformly random table drawn from `trial_rng(seed, trial)`.
    pub fn random(widths: SeededWidths, seed: u64, trial: u64) -> Result<Self> {
        let table = random_table(widths.n + widths.d, widths.m, seed, trial)?;
        Ok(SeededMap { widths, kind: SeededKind::Searched { seed, trial, table } })
    }

    pub fn id(&self) -> String {
        let SeededWidths { n, d, m } = self.widths;
        match &self.kind {
            SeededKind::LhlToeplitz => format!("lhl_toeplitz:{n}x{d}->{m}"),
            SeededKind::Gf2xMultiply => format!("gf2x_multiply:{n}x{d}->{m}"),
            SeededKind::Table { table } => format!("table:{n}x{d}->{m}:{:016x}", table_digest(table)),
            SeededKind::Searched { seed, trial, .. } => format!("searched:{n}x{d}->{m}:seed={seed}:trial={trial}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeededExtractor {
    pub map: SeededMap,
    /// Whether the seed is to be output alongside.
    pub strong: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeededCondenser {
    pub map: SeededMap,
}

/// Toeplitz hashing, a strong extractor by the leftover hash lemma.
pub fn lhl_extractor(n: u32, m: u32) -> Result<SeededExtractor> {
    let map = SeededMap { widths: SeededWidths { n, d: n + m - 1, m }, kind: SeededKind::LhlToeplitz };
    map.validate()?;
    Ok(SeededExtractor { map, strong: true })
}

/// `x * s` in `GF(2^n)` truncated to `m` bits, also a universal family.
pub fn gf2_multiply_extractor(n: u32, m: u32) -> Result<SeededExtractor> {
    let map = SeededMap { widths: SeededWidths { n, d: n, m }, kind: SeededKind::Gf2xMultiply };
    map.validate()?;
    Ok(SeededExtractor { map, strong: true })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TwoSourceKind {
    /// `x * y` in `GF(2^n)`, low `m` bits; `n1 = n2 = n`.
    InnerProduct,
    /// `sum_{i=1..d} x_i * y^i` in `GF(2^n)`, low `m` bits; `x` is `d`
    /// blocks of `n` bits, `x_1` leftmost.
    PolyEval { d: u32 },
    /// Explicit table indexed by `(x1 << n2) | x2`.
    Table { table: Vec<u32> },
    Searched { seed: u64, trial: u64, table: Vec<u32> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoSourceExtractor {
    pub n1: u32,
    pub n2: u32,
    pub m: u32,
    #[serde(flatten)]
    pub kind: TwoSourceKind,
    /// Verified (or to be verified) as strong in the first source.
    pub strong_first: bool,
}

impl TwoSourceExtractor {
    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            TwoSourceKind::InnerProduct => {
                if self.n1 != self.n2 || self.m == 0 || self.m > self.n1 || self.n1 > 64 {
                    return Err(invalid("widths", "inner product needs n1 = n2 <= 64 and m <= n"));
                }
            }
            TwoSourceKind::PolyEval { d } => {
                if *d == 0 || self.n1 != d * self.n2 || self.m == 0 || self.m > self.n2 || self.n1 > 64 {
                    return Err(invalid("widths", "polynomial evaluation needs n1 = d * n2 <= 64 and m <= n2"));
                }
            }
            TwoSourceKind::Table { table } | TwoSourceKind::Searched { table, .. } => {
                check_table(table, self.n1 + self.n2, self.m)?
            }
        }
        Ok(())
    }

    pub fn eval(&self, x1: u64, x2: u64) -> u64 {
        match &self.kind {
            TwoSourceKind::InnerProduct => {
                let f = Gf2n::new(self.n2).expect("validated");
                f.mul(x1, x2) & mask(self.m)
            }
            TwoSourceKind::PolyEval { d } => {
                let n = self.n2;
                let f = Gf2n::new(n).expect("validated");
                let mut acc = 0u64;
                let mut pw = x2;
                for i in 0..*d {
                    let xi = (x1 >> (n * (d - 1 - i))) & mask(n);
                    acc ^= f.mul(xi, pw);
                    pw = f.mul(pw, x2);
                }
                acc & mask(self.m)
            }
            TwoSourceKind::Table { table } | TwoSourceKind::Searched { table, .. } => {
                table[((x1 << self.n2) | x2) as usize] as u64
            }
        }
    }

    /// Uniformly random table drawn from `trial_rng(seed, trial)`.
    pub fn random(n1: u32, n2: u32, m: u32, seed: u64, trial: u64) -> Result<Self> {
        let table = random_table(n1 + n2, m, seed, trial)?;
        Ok(TwoSourceExtractor { n1, n2, m, kind: TwoSourceKind::Searched { seed, trial, table }, strong_first: false })
    }

    pub fn id(&self) -> String {
        let (n1, n2, m) = (self.n1, self.n2, self.m);
        match &self.kind {
            TwoSourceKind::InnerProduct => format!("inner_product:{n1}x{n2}->{m}"),
            TwoSourceKind::PolyEval { d } => format!("poly_eval:d={d}:{n1}x{n2}->{m}"),
            TwoSourceKind::Table { table } => format!("table:{n1}x{n2}->{m}:{:016x}", table_digest(table)),
            TwoSourceKind::Searched { seed, trial, .. } => format!("searched:{n1}x{n2}->{m}:seed={seed}:trial={trial}"),
        }
    }
}

pub fn inner_product_2ext(n: u32, m: u32) -> Result<TwoSourceExtractor> {
    let e = TwoSourceExtractor { n1: n, n2: n, m, kind: TwoSourceKind::InnerProduct, strong_first: true };
    e.validate()?;
    Ok(e)
}

pub fn asymmetric_2ext(d: u32, n: u32, m: u32) -> Result<TwoSourceExtractor> {
    let e = TwoSourceExtractor { n1: d * n, n2: n, m, kind: TwoSourceKind::PolyEval { d }, strong_first: false };
    e.validate()?;
    Ok(e)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftedParams {
    pub k1: f64,
    pub eps: f64,
    /// `eps >= 1`: the guarantee says nothing.
    pub vacuous: bool,
}

/// A `(k1, k2, eps)` two-source extractor is `(k1 + log(1/eta), k2,
/// eps + eta)` average-case strong.
pub fn average_case_lift(k1: f64, eps: f64, eta: f64) -> Result<LiftedParams> {
    if !(eta > 0.0) {
        return Err(invalid("eta", format!("{eta} must be positive")));
    }
    if !(eps >= 0.0) {
        return Err(invalid("eps", format!("{eps} must be non-negative")));
    }
    let eps = eps + eta;
    Ok(LiftedParams { k1: k1 + (1.0 / eta).log2(), eps, vacuous: eps >= 1.0 })
}
