// SPDX-License-Identifier: Apache-2.0

//! Condensers and transforms assembled from the primitives, plus their
//! parameter calculators and exact verification harnesses.

mod harness;
mod params;

pub use harness::{
    sliding_window_check, split_condenser_check, xor_condenser_check, xor_entropy_check, search_xor_condenser, SlidingWindowCase,
    SlidingWindowReport, SplitCheck, XorCondenserCase, XorCondenserReport, XorEntropyReport,
};
pub use params::{exact_good_outputs, good_output_count, param_report, ParamReport, THEOREM_IDS};

use serde::{Deserialize, Serialize};

use crate::dist::{mask, prefix_bits};
use crate::error::{invalid, Error, Result};
use crate::prims::{SeededCondenser, SeededExtractor, TwoSourceExtractor};

/// A bit string of explicit width.
pub type Piece = (u64, u32);

fn concat(pieces: &[Piece]) -> Result<Piece> {
    let width: u32 = pieces.iter().map(|p| p.1).sum();
    if width > 64 {
        return Err(invalid("width", format!("{width} bits exceed 64")));
    }
    Ok((pieces.iter().fold(0u64, |acc, &(v, w)| if w == 0 { acc } else { (acc << w) | v }), width))
}

fn check_blocks(blocks: &[u64], n: u32) -> Result<()> {
    if n == 0 || n > 63 {
        return Err(invalid("n", format!("{n} outside 1..=63")));
    }
    if let Some(&b) = blocks.iter().find(|&&b| b >> n != 0) {
        return Err(Error::WidthMismatch { expected: n, found: 64 - b.leading_zeros() });
    }
    Ok(())
}

/// Splits each block into a left half (the extra bit when `n` is odd) and
/// a right half, in order `X_1L, X_1R, X_2L, ..`.
pub fn split_blocks(blocks: &[u64], n: u32) -> Result<Vec<Piece>> {
    check_blocks(blocks, n)?;
    let right = n / 2;
    let left = n - right;
    Ok(blocks.iter().flat_map(|&b| [(b >> right, left), (b & mask(right), right)]).collect())
}

/// `O_i = 2Ext(X_{i-d} .. X_{i-1}, X_i)` for `i = 2..ell`, with blocks at
/// positions below 1 read as `0^n`. Returns `ell - 1` outputs.
pub fn sliding_window_transform(blocks: &[u64], n: u32, two_ext: &TwoSourceExtractor, d: usize) -> Result<Vec<u64>> {
    check_blocks(blocks, n)?;
    two_ext.validate()?;
    if d == 0 || two_ext.n1 as usize != d * n as usize || two_ext.n2 != n {
        return Err(invalid("two_ext", format!("widths ({}, {}) do not match d*n = {}, n = {n}", two_ext.n1, two_ext.n2, d * n as usize)));
    }
    Ok((1..blocks.len())
        .map(|i| {
            let window = (0..d).fold(0u64, |acc, t| {
                let v = (i + t).checked_sub(d).map_or(0, |j| blocks[j]);
                (acc << n) | v
            });
            two_ext.eval(window, blocks[i])
        })
        .collect())
}

/// `sCond(x, y)` on the concatenations of the `x` and `y` blocks.
pub fn two_source_condenser(x_blocks: &[u64], n_x: u32, y_blocks: &[u64], n_y: u32, scond: &SeededCondenser) -> Result<u64> {
    check_blocks(x_blocks, n_x)?;
    check_blocks(y_blocks, n_y)?;
    let x = concat(&x_blocks.iter().map(|&v| (v, n_x)).collect::<Vec<_>>())?;
    let y = concat(&y_blocks.iter().map(|&v| (v, n_y)).collect::<Vec<_>>())?;
    two_piece_condense(x, y, scond)
}

pub(crate) fn two_piece_condense(x: Piece, y: Piece, scond: &SeededCondenser) -> Result<u64> {
    scond.map.validate()?;
    let w = scond.map.widths;
    if w.n != x.1 || w.d != y.1 {
        return Err(invalid("scond", format!("widths ({}, {}) but inputs are ({}, {})", w.n, w.d, x.1, y.1)));
    }
    Ok(scond.map.eval(x.0, y.0))
}

/// Reads the first `ceil(log2(ell - 1))` bits of block 1 as `j` and
/// outputs block `2 + (j mod (ell - 1))`.
pub fn address_extractor(blocks: &[u64], n: u32) -> Result<u64> {
    check_blocks(blocks, n)?;
    let ell = blocks.len();
    if ell < 2 {
        return Err(invalid("blocks", "need at least 2 blocks"));
    }
    let w = crate::protocols::index_bits(ell).min(n);
    if ell > 2 && (1u64 << w) < (ell - 1) as u64 {
        return Err(invalid("n", format!("{n} bits cannot index {} blocks", ell - 1)));
    }
    let j = prefix_bits(blocks[0], n, w) % (ell as u64 - 1);
    Ok(blocks[1 + j as usize])
}

/// Exact worst case over online adversaries controlling `bad` of the
/// address extractor's distance from uniform, on uniform blocks.
pub fn address_extractor_error(ell: usize, n: u32, bad: &[usize], budget: &crate::budget::Budget) -> Result<f64> {
    let f = crate::sources::BlockFunction::from_fn(ell, n, n, |b| address_extractor(b, n).unwrap_or(0))?;
    address_extractor(&vec![0; ell], n)?;
    let spec = crate::sources::SourceSpec::new(ell, n, n, bad.iter().copied())?;
    crate::sources::worst_case_distance(&f, &spec, &crate::sources::GoodBlockModel::Uniform, budget)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitCondenserConfig {
    /// Prefix length taken from each of the last `ell` half-blocks.
    pub n_v: u32,
    pub scond: SeededCondenser,
}

/// Splits every block in two, takes the first `ell` half-blocks as `U` and
/// the `n_v`-bit prefixes of the last `ell` as `V`, and condenses `(U, V)`.
pub fn general_uni_condenser(blocks: &[u64], n: u32, cfg: &SplitCondenserConfig) -> Result<u64> {
    let (u, v) = split_condenser_inputs(blocks, n, cfg.n_v)?;
    two_piece_condense(u, v, &cfg.scond)
}

pub(crate) fn split_condenser_inputs(blocks: &[u64], n: u32, n_v: u32) -> Result<(Piece, Piece)> {
    let halves = split_blocks(blocks, n)?;
    let ell = blocks.len();
    let mut v = Vec::with_capacity(ell);
    for &(h, w) in &halves[ell..] {
        if n_v > w {
            return Err(invalid("n_v", format!("{n_v} exceeds half-block width {w}")));
        }
        v.push((prefix_bits(h, w, n_v), n_v));
    }
    Ok((concat(&halves[..ell])?, concat(&v)?))
}

/// `sExt_1(x, y_1) ^ .. ^ sExt_t(x, y_t)`.
pub fn xor_multi_extract(x: u64, seeds: &[u64], exts: &[SeededExtractor]) -> Result<u64> {
    if seeds.len() != exts.len() || exts.is_empty() {
        return Err(invalid("seeds", format!("{} seeds for {} extractors", seeds.len(), exts.len())));
    }
    let (n, m) = (exts[0].map.widths.n, exts[0].map.widths.m);
    let mut out = 0;
    for (e, &y) in exts.iter().zip(seeds) {
        e.map.validate()?;
        let w = e.map.widths;
        if w.n != n || w.m != m {
            return Err(invalid("exts", "extractors must share source and output widths"));
        }
        if x >> n != 0 || y >> w.d != 0 {
            return Err(invalid("input", format!("value outside widths ({n}, {})", w.d)));
        }
        out ^= e.map.eval(x, y);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XorCondenserConfig {
    /// Prefix length `n_{y,i}` per seed block.
    pub n_y: Vec<u32>,
    /// `exts[i]` has source width `ell * half-width` and seed width `n_y[i]`.
    pub exts: Vec<SeededExtractor>,
}

/// Splits every block in two; `W` is the first `ell` half-blocks and `Y_i`
/// the `n_{y,i}`-bit prefix of half-block `ell + i`. Outputs the XOR of
/// `sExt_i(W, Y_i)`.
pub fn explicit_xor_condenser(blocks: &[u64], n: u32, cfg: &XorCondenserConfig) -> Result<u64> {
    let (w, ys) = xor_condenser_inputs(blocks, n, &cfg.n_y)?;
    xor_multi_extract(w, &ys, &cfg.exts)
}

pub(crate) fn xor_condenser_inputs(blocks: &[u64], n: u32, n_y: &[u32]) -> Result<(u64, Vec<u64>)> {
    let halves = split_blocks(blocks, n)?;
    let ell = blocks.len();
    if n_y.len() != ell {
        return Err(invalid("n_y", format!("{} prefix lengths for ell {ell}", n_y.len())));
    }
    let mut ys = Vec::with_capacity(ell);
    for (&(h, w), &len) in halves[ell..].iter().zip(n_y) {
        if len > w {
            return Err(invalid("n_y", format!("{len} exceeds half-block width {w}")));
        }
        ys.push(prefix_bits(h, w, len));
    }
    Ok((concat(&halves[..ell])?.0, ys))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prims::{lhl_extractor, SeededKind, SeededMap, SeededWidths, TwoSourceKind};

    fn table_2ext(n1: u32, n2: u32, f: impl Fn(u64, u64) -> u64) -> TwoSourceExtractor {
        let table = (0..1u64 << (n1 + n2)).map(|i| f(i >> n2, i & mask(n2)) as u32).collect();
        TwoSourceExtractor { n1, n2, m: 1, kind: TwoSourceKind::Table { table }, strong_first: false }
    }

    #[test]
    fn sliding_window_by_hand() {
        // 2Ext(w, x) = parity of (w & x): ell = 3, d = 1, n = 2.
        let e = table_2ext(2, 2, |w, x| ((w & x).count_ones() & 1) as u64);
        let out = sliding_window_transform(&[0b11, 0b10, 0b11], 2, &e, 1).unwrap();
        assert_eq!(out, vec![1, 1]);
        let zeros = sliding_window_transform(&[0, 0, 0, 0], 2, &e, 1).unwrap();
        assert_eq!(zeros, vec![e.eval(0, 0); 3]);
    }

    #[test]
    fn window_pads_with_zero_blocks() {
        // 2Ext(w, x) = w's 4 bits folded; with d = ell the window of O_2 is 0^n X_1.
        let e = table_2ext(4, 2, |w, _| (w >> 2) & 1);
        let out = sliding_window_transform(&[0b01, 0b00, 0b00], 2, &e, 2).unwrap();
        // O_2 window = (0, X_1), O_3 window = (X_1, X_2).
        assert_eq!(out, vec![0, 1]);
    }

    #[test]
    fn address_extractor_errors() {
        let b = crate::budget::Budget::default();
        // Error (1 - 2^-n)/(ell - 1) when ell - 1 is a power of two; ell = 4 skews the index.
        for (ell, n, want) in [(3usize, 1u32, 0.25), (5, 2, 0.1875)] {
            let worst = (1..=ell).map(|j| address_extractor_error(ell, n, &[j], &b).unwrap()).fold(0.0, f64::max);
            assert_eq!(worst, want);
        }
        assert_eq!(address_extractor_error(4, 2, &[2], &b).unwrap(), 0.375);
        assert_eq!(address_extractor_error(4, 2, &[1], &b).unwrap(), 0.0);
    }

    #[test]
    fn splitting_odd_width() {
        assert_eq!(split_blocks(&[0b10110], 5).unwrap(), vec![(0b101, 3), (0b10, 2)]);
    }

    #[test]
    fn xor_self_cancels_and_single_term() {
        let e = lhl_extractor(4, 2).unwrap();
        assert_eq!(xor_multi_extract(9, &[5, 5], &[e.clone(), e.clone()]).unwrap(), 0);
        assert_eq!(xor_multi_extract(9, &[5], std::slice::from_ref(&e)).unwrap(), e.map.eval(9, 5));
    }

    #[test]
    fn xor_condenser_with_one_block_is_seeded_extraction() {
        // ell = 1: W = left half, Y_1 = prefix of right half.
        let e = SeededExtractor {
            map: SeededMap { widths: SeededWidths { n: 2, d: 1, m: 1 }, kind: SeededKind::Table { table: vec![0, 1, 1, 0, 1, 1, 0, 0] } },
            strong: false,
        };
        let cfg = XorCondenserConfig { n_y: vec![1], exts: vec![e.clone()] };
        for x in 0..16u64 {
            assert_eq!(explicit_xor_condenser(&[x], 4, &cfg).unwrap(), e.map.eval(x >> 2, (x >> 1) & 1));
        }
    }

    #[test]
    fn split_condenser_layout() {
        // ell = 2, n = 4: U = X_1L X_1R, V = prefixes of X_2L X_2R.
        let table = (0..1u32 << 6).collect();
        let scond = SeededCondenser { map: SeededMap { widths: SeededWidths { n: 4, d: 2, m: 6 }, kind: SeededKind::Table { table } } };
        let cfg = SplitCondenserConfig { n_v: 1, scond };
        let out = general_uni_condenser(&[0b1011, 0b0110], 4, &cfg).unwrap();
        assert_eq!(out, (0b1011 << 2) | 0b01);
    }
}
