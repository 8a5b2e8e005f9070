// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{RoundKind, RoundRecord};
use crate::error::Result;

/// What a rushing adversary sees before answering in a round.
#[derive(Clone, Copy, Debug)]
pub struct RoundView<'a> {
    /// 1-based round number.
    pub round: usize,
    pub kind: &'a RoundKind,
    /// Survivors entering the round, sorted.
    pub survivors: &'a [usize],
    /// Every player speaking this round, sorted.
    pub speakers: &'a [usize],
    /// Messages lie in `0..domain`.
    pub domain: u64,
    /// This round's good messages, sorted by player.
    pub good: &'a [(usize, u64)],
    /// Bad speakers that must answer, sorted.
    pub bad: &'a [usize],
    pub transcript: &'a [RoundRecord],
}

/// Controls the players in `bad_set`; must return exactly one message per
/// player in `view.bad`.
pub trait PlayerAdversary: Sync {
    fn bad_set(&self) -> &BTreeSet<usize>;
    fn respond(&self, view: &RoundView<'_>) -> Result<Vec<(usize, u64)>>;
}

/// Bad players always send `value mod domain`. With an empty bad set this
/// is the honest execution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstantPlayers {
    pub bad: BTreeSet<usize>,
    pub value: u64,
}

impl ConstantPlayers {
    pub fn new(bad: impl IntoIterator<Item = usize>, value: u64) -> Self {
        ConstantPlayers { bad: bad.into_iter().collect(), value }
    }

    pub fn honest() -> Self {
        Self::new([], 0)
    }
}

impl PlayerAdversary for ConstantPlayers {
    fn bad_set(&self) -> &BTreeSet<usize> {
        &self.bad
    }

    fn respond(&self, view: &RoundView<'_>) -> Result<Vec<(usize, u64)>> {
        Ok(view.bad.iter().map(|&p| (p, self.value % view.domain)).collect())
    }
}

/// Greedy rushing adversary.
///
/// Lightest-bin rounds: bad players join the bin that is lightest among
/// the good messages for as long as it stays the lightest, and the rest
/// go to the heaviest other bin. Index elections: a bad first survivor
/// names a bad player when one survives. Broadcasts: the first bad
/// speaker forces the XOR to `target`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrowdingAdversary {
    pub bad: BTreeSet<usize>,
    pub target: u64,
}

impl CrowdingAdversary {
    pub fn new(bad: impl IntoIterator<Item = usize>, target: u64) -> Self {
        CrowdingAdversary { bad: bad.into_iter().collect(), target }
    }
}

/// Whether bin `l` with `c` members beats every other bin of `counts`
/// under the lowest-index tie-break.
fn stays_lightest(counts: &[usize], l: usize, c: usize) -> bool {
    counts.iter().enumerate().all(|(j, &x)| j == l || if j < l { c < x } else { c <= x })
}

impl PlayerAdversary for CrowdingAdversary {
    fn bad_set(&self) -> &BTreeSet<usize> {
        &self.bad
    }

    fn respond(&self, view: &RoundView<'_>) -> Result<Vec<(usize, u64)>> {
        match *view.kind {
            RoundKind::LightestBin { bins } => {
                let mut counts = vec![0usize; bins];
                for &(_, m) in view.good {
                    counts[m as usize] += 1;
                }
                let light = (0..bins).min_by_key(|&b| (counts[b], b)).expect("bins >= 2");
                let heavy = (0..bins).filter(|&b| b != light).max_by_key(|&b| (counts[b], usize::MAX - b)).expect("bins >= 2");
                let mut out = Vec::with_capacity(view.bad.len());
                for &p in view.bad {
                    if stays_lightest(&counts, light, counts[light] + 1) {
                        counts[light] += 1;
                        out.push((p, light as u64));
                    } else {
                        counts[heavy] += 1;
                        out.push((p, heavy as u64));
                    }
                }
                Ok(out)
            }
            RoundKind::IndexElection => {
                let others = view.survivors.get(1..).unwrap_or(&[]);
                let pick = others.iter().position(|p| self.bad.contains(p)).unwrap_or(0) as u64;
                Ok(view.bad.iter().map(|&p| (p, pick)).collect())
            }
            RoundKind::Broadcast { .. } => {
                let good = view.good.iter().fold(0, |a, &(_, m)| a ^ m);
                Ok(view
                    .bad
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| (p, if i == 0 { (self.target ^ good) % view.domain } else { 0 }))
                    .collect())
            }
        }
    }
}
