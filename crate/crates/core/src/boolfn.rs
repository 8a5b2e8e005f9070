// SPDX-License-Identifier: Apache-2.0

//! Boolean functions on `{0,1}^ell`, their Fourier spectra and
//! (online) influences.
//!
//! Coordinates are numbered `1..=ell`. Coordinate `i` is bit `i - 1` of an
//! input index, so the prefix `x_1 .. x_{i-1}` is the low `i - 1` bits.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, over_budget, Error, Result};

/// Largest supported number of inputs.
pub const MAX_ELL: u32 = 24;

const PARSEVAL_TOLERANCE: f64 = 1e-9;
const POINCARE_TOLERANCE: f64 = 1e-9;

/// A dense truth table, bit `x` of the table holding `f(x)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BooleanFunction {
    ell: u32,
    words: Vec<u64>,
}

impl fmt::Debug for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BooleanFunction(ell={}, {})", self.ell, self.to_hex())
    }
}

fn word_count(ell: u32) -> usize {
    (1usize << ell).div_ceil(64)
}

fn table_mask(ell: u32) -> u64 {
    if ell >= 6 {
        u64::MAX
    } else {
        (1u64 << (1u32 << ell)) - 1
    }
}

impl BooleanFunction {
    pub fn zero(ell: u32) -> Result<Self> {
        if ell > MAX_ELL {
            return Err(over_budget("boolean function inputs", ell, MAX_ELL));
        }
        Ok(BooleanFunction { ell, words: vec![0; word_count(ell)] })
    }

    pub fn from_fn(ell: u32, f: impl Fn(u64) -> bool) -> Result<Self> {
        let mut g = BooleanFunction::zero(ell)?;
        for x in 0..1u64 << ell {
            if f(x) {
                g.set(x, true);
            }
        }
        Ok(g)
    }

    /// Builds from a truth table of `2^ell` entries.
    pub fn from_table(ell: u32, table: &[bool]) -> Result<Self> {
        if table.len() != 1usize << ell.min(MAX_ELL + 1) {
            return Err(invalid("table", format!("{} entries for ell {ell}", table.len())));
        }
        BooleanFunction::from_fn(ell, |x| table[x as usize])
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn size(&self) -> usize {
        1usize << self.ell
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, x: u64) -> bool {
        (self.words[(x >> 6) as usize] >> (x & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, x: u64, v: bool) {
        let w = &mut self.words[(x >> 6) as usize];
        if v {
            *w |= 1 << (x & 63);
        } else {
            *w &= !(1 << (x & 63));
        }
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// `E[f(U_ell)]`.
    pub fn expectation(&self) -> f64 {
        self.count_ones() as f64 / self.size() as f64
    }

    pub fn is_balanced(&self) -> bool {
        2 * self.count_ones() == self.size() as u64
    }

    /// Uniformly random table from a seed.
    pub fn random(ell: u32, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        BooleanFunction::random_with(ell, &mut rng)
    }

    pub fn random_with<R: Rng + ?Sized>(ell: u32, rng: &mut R) -> Result<Self> {
        let mut g = BooleanFunction::zero(ell)?;
        let m = table_mask(ell);
        for w in g.words.iter_mut() {
            *w = rng.random::<u64>() & m;
        }
        Ok(g)
    }

    /// Uniformly random table with exactly `2^(ell-1)` ones.
    pub fn random_balanced_with<R: Rng + ?Sized>(ell: u32, rng: &mut R) -> Result<Self> {
        if ell == 0 {
            return Err(invalid("ell", "a balanced function needs ell >= 1"));
        }
        let mut g = BooleanFunction::zero(ell)?;
        for x in sample(rng, 1usize << ell, 1usize << (ell - 1)) {
            g.set(x as u64, true);
        }
        Ok(g)
    }

    /// Hex string, one nibble per four consecutive inputs, lowest input
    /// in the lowest bit of the first nibble.
    pub fn to_hex(&self) -> String {
        let nibbles = ((1usize << self.ell) / 4).max(1);
        (0..nibbles)
            .map(|j| {
                let nib = (self.words[j / 16] >> (4 * (j % 16))) & 0xf;
                char::from_digit(nib as u32, 16).unwrap()
            })
            .collect()
    }

    pub fn from_hex(ell: u32, hex: &str) -> Result<Self> {
        let mut g = BooleanFunction::zero(ell)?;
        let nibbles = ((1usize << ell) / 4).max(1);
        let hex = hex.trim();
        if hex.len() != nibbles {
            return Err(Error::Malformed(format!(
                "expected {nibbles} hex digits for ell {ell}, got {}",
                hex.len()
            )));
        }
        for (j, c) in hex.chars().enumerate() {
            let nib = c
                .to_digit(16)
                .ok_or_else(|| Error::Malformed(format!("bad hex digit {c:?}")))? as u64;
            g.words[j / 16] |= nib << (4 * (j % 16));
        }
        if g.words[0] & !table_mask(ell) != 0 {
            return Err(Error::Malformed("bits set beyond the table".into()));
        }
        Ok(g)
    }

    /// True when `x <= y` coordinatewise implies `f(x) <= f(y)`.
    pub fn is_monotone(&self) -> bool {
        (0..1u64 << self.ell).all(|x| {
            !self.get(x) || (0..self.ell).all(|b| self.get(x | (1 << b)))
        })
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.ell as usize {
            return Err(Error::IndexOutOfRange { index: i, len: self.ell as usize });
        }
        Ok(())
    }
}

/// Fourier coefficients `fhat(S) = E[(-1)^f(y) chi_S(y)]`, indexed by the
/// bitmask of `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSpectrum {
    ell: u32,
    coeffs: Vec<f64>,
}

impl FourierSpectrum {
    pub fn new(ell: u32, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != 1usize << ell {
            return Err(invalid("coeffs", format!("{} entries for ell {ell}", coeffs.len())));
        }
        let weight: f64 = coeffs.iter().map(|c| c * c).sum();
        if (weight - 1.0).abs() > PARSEVAL_TOLERANCE {
            return Err(invalid("coeffs", format!("squared coefficients sum to {weight}")));
        }
        Ok(FourierSpectrum { ell, coeffs })
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, set: u64) -> f64 {
        self.coeffs[set as usize]
    }

    /// `Var((-1)^f) = sum_{S != {}} fhat(S)^2`.
    pub fn variance(&self) -> f64 {
        self.coeffs[1..].iter().map(|c| c * c).sum()
    }

    /// `sum_{S subset [i], i in S} fhat(S)^2`.
    pub fn prefix_weight(&self, i: usize) -> Result<f64> {
        if i == 0 || i > self.ell as usize {
            return Err(Error::IndexOutOfRange { index: i, len: self.ell as usize });
        }
        let top = 1usize << (i - 1);
        Ok((top..2 * top).map(|s| self.coeffs[s] * self.coeffs[s]).sum())
    }
}

/// In-place unnormalised Walsh-Hadamard transform.
pub fn fwht<T>(a: &mut [T])
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T>,
{
    let n = a.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in a.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (u, v) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*u, *v);
                *u = x + y;
                *v = x - y;
            }
        }
        h *= 2;
    }
}

pub fn fourier_transform(f: &BooleanFunction) -> FourierSpectrum {
    let mut a: Vec<i32> = (0..f.size() as u64)
        .map(|x| if f.get(x) { -1 } else { 1 })
        .collect();
    fwht(&mut a);
    let scale = 1.0 / f.size() as f64;
    let coeffs = a.into_iter().map(|v| v as f64 * scale).collect();
    FourierSpectrum::new(f.ell, coeffs).expect("transform of a Boolean function satisfies Parseval")
}

const PAIR_MASKS: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0f0f_0f0f_0f0f_0f0f,
    0x00ff_00ff_00ff_00ff,
    0x0000_ffff_0000_ffff,
    0x0000_0000_ffff_ffff,
];

/// `I_i[f] = Pr_x[f(x) != f(x ^ e_i)]`.
pub fn influence(f: &BooleanFunction, i: usize) -> Result<f64> {
    f.check_index(i)?;
    let s = (i - 1) as u32;
    let mut flips: u64 = 0;
    if s >= 6 {
        let stride = 1usize << (s - 6);
        for (w, &word) in f.words.iter().enumerate() {
            if w & stride == 0 {
                flips += (word ^ f.words[w + stride]).count_ones() as u64;
            }
        }
    } else {
        let m = PAIR_MASKS[s as usize] & table_mask(f.ell);
        for &word in &f.words {
            flips += ((word ^ (word >> (1u32 << s))) & m).count_ones() as u64;
        }
    }
    Ok(flips as f64 / (f.size() / 2) as f64)
}

pub fn influences(f: &BooleanFunction) -> Vec<f64> {
    (1..=f.ell as usize).map(|i| influence(f, i).unwrap()).collect()
}

pub fn total_influence(f: &BooleanFunction) -> f64 {
    influences(f).iter().sum()
}

/// All online influences in one right-to-left pass over prefix counts.
pub fn online_influences(f: &BooleanFunction) -> Vec<f64> {
    let ell = f.ell as usize;
    let mut out = vec![0.0; ell];
    if ell == 0 {
        return out;
    }
    // cnt[p] = number of ones among completions of the prefix p.
    let mut cnt: Vec<u32> = (0..f.size() as u64).map(|x| f.get(x) as u32).collect();
    let denom = (f.size() / 2) as f64;
    for j in (1..=ell).rev() {
        let half = 1usize << (j - 1);
        let (lo, hi) = cnt.split_at_mut(half);
        let mut acc: u64 = 0;
        for (a, b) in lo.iter_mut().zip(hi.iter()) {
            acc += a.abs_diff(*b) as u64;
            *a += *b;
        }
        cnt.truncate(half);
        // |E_y f(x,1,y) - E_y f(x,0,y)| summed over 2^(j-1) prefixes, each
        // difference scaled by 2^(ell-j).
        out[j - 1] = acc as f64 / denom;
    }
    out
}

/// `oI_i[f] = E_{x ~ U_{i-1}} |E_y f(x,1,y) - E_y f(x,0,y)|`.
pub fn online_influence(f: &BooleanFunction, i: usize) -> Result<f64> {
    f.check_index(i)?;
    let low = 1u64 << (i - 1);
    let mut cnt = vec![0i64; 1usize << i];
    for x in 0..f.size() as u64 {
        if f.get(x) {
            cnt[(x & (2 * low - 1)) as usize] += 1;
        }
    }
    let acc: i64 = (0..low as usize)
        .map(|p| (cnt[p + low as usize] - cnt[p]).abs())
        .sum();
    Ok(acc as f64 / (f.size() / 2) as f64)
}

/// Online influence from the spectrum:
/// `E_x |sum_{T subset [i], i in T} fhat(T) chi_{T \ {i}}(x)|`.
pub fn online_influence_fourier(spec: &FourierSpectrum, i: usize) -> Result<f64> {
    if i == 0 || i > spec.ell as usize {
        return Err(Error::IndexOutOfRange { index: i, len: spec.ell as usize });
    }
    let half = 1usize << (i - 1);
    let mut g: Vec<f64> = spec.coeffs[half..2 * half].to_vec();
    fwht(&mut g);
    Ok(g.iter().map(|v| v.abs()).sum::<f64>() / half as f64)
}

pub fn total_online_influence(f: &BooleanFunction) -> f64 {
    online_influences(f).iter().sum()
}

/// Largest online influence and its coordinate, ties to the lowest index.
pub fn max_online_influence(f: &BooleanFunction) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (j, v) in online_influences(f).into_iter().enumerate() {
        if v > best.1 {
            best = (j + 1, v);
        }
    }
    best
}

/// `Var((-1)^f) = 4p(1-p)` with `p = E f`.
pub fn variance_ef(f: &BooleanFunction) -> f64 {
    let p = f.expectation();
    4.0 * p * (1.0 - p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoincareReport {
    pub ell: u32,
    pub var_ef: f64,
    pub total_oi: f64,
    pub upper: f64,
    pub max_oi: f64,
    pub max_oi_index: usize,
    pub lower_violated: bool,
    pub upper_violated: bool,
}

/// Checks `Var(e(f)) <= oI[f] <= sqrt(ell Var(e(f)))`.
pub fn poincare_report(f: &BooleanFunction) -> PoincareReport {
    let var_ef = fourier_transform(f).variance();
    let ois = online_influences(f);
    let total_oi: f64 = ois.iter().sum();
    let upper = (f.ell as f64 * var_ef).sqrt();
    let (max_oi_index, max_oi) = max_online_influence(f);
    PoincareReport {
        ell: f.ell,
        var_ef,
        total_oi,
        upper,
        max_oi,
        max_oi_index,
        lower_violated: total_oi < var_ef - POINCARE_TOLERANCE,
        upper_violated: total_oi > upper + POINCARE_TOLERANCE,
    }
}

/// Families with closed-form descriptions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum NamedFunction {
    Parity,
    Majority,
    /// `ell = 2^a + a`; the first `a` coordinates, most significant first,
    /// index one of the remaining `2^a` data coordinates (0-based).
    Address,
    /// `f(x) = x_i`.
    Dictator { index: usize },
    Constant { value: bool },
    Random { seed: u64 },
}

impl FromStr for NamedFunction {
    type Err = Error;

    /// Accepts `parity`, `maj`, `addr`, `dict:<i>`, `const:<0|1>`,
    /// `random:<seed>`.
    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let num = |a: Option<&str>| -> Result<u64> {
            a.ok_or_else(|| Error::Malformed(format!("`{s}` needs an argument")))?
                .parse::<u64>()
                .map_err(|_| Error::Malformed(format!("bad argument in `{s}`")))
        };
        match head {
            "parity" | "xor" => Ok(NamedFunction::Parity),
            "maj" | "majority" => Ok(NamedFunction::Majority),
            "addr" | "address" => Ok(NamedFunction::Address),
            "dict" | "dictator" => Ok(NamedFunction::Dictator { index: num(arg)? as usize }),
            "const" | "constant" => Ok(NamedFunction::Constant { value: num(arg)? != 0 }),
            "random" => Ok(NamedFunction::Random { seed: num(arg)? }),
            other => Err(Error::Unknown(other.to_string())),
        }
    }
}

/// `a` with `2^a + a = ell`, if any.
pub fn address_bits(ell: u32) -> Option<u32> {
    (0..=4).find(|&a| (1u32 << a) + a == ell)
}

pub fn make_named_function(kind: &NamedFunction, ell: u32) -> Result<BooleanFunction> {
    match kind {
        NamedFunction::Parity => BooleanFunction::from_fn(ell, |x| x.count_ones() % 2 == 1),
        NamedFunction::Majority => {
            if ell.is_multiple_of(2) {
                return Err(invalid("ell", format!("majority needs odd ell, got {ell}")));
            }
            BooleanFunction::from_fn(ell, |x| 2 * x.count_ones() > ell)
        }
        NamedFunction::Address => {
            let a = address_bits(ell)
                .filter(|&a| a >= 1)
                .ok_or_else(|| invalid("ell", format!("{ell} is not 2^a + a with a >= 1")))?;
            BooleanFunction::from_fn(ell, |x| {
                let idx = (0..a).fold(0u64, |acc, b| (acc << 1) | ((x >> b) & 1));
                (x >> (a as u64 + idx)) & 1 == 1
            })
        }
        NamedFunction::Dictator { index } => {
            if *index == 0 || *index > ell as usize {
                return Err(Error::IndexOutOfRange { index: *index, len: ell as usize });
            }
            BooleanFunction::from_fn(ell, |x| (x >> (index - 1)) & 1 == 1)
        }
        NamedFunction::Constant { value } => BooleanFunction::from_fn(ell, |_| *value),
        NamedFunction::Random { seed } => BooleanFunction::random(ell, *seed),
    }
}
