// SPDX-License-Identifier: Apache-2.0

//! Synchronous full-information protocols with a rushing adversary.
//!
//! Players are numbered from 1. In every round the active players each
//! send one message; bad players answer after seeing every good message
//! of the round. The engine here is shared by the Monte Carlo runner, the
//! exact adversary search and the extractor built from a protocol.

mod adversary;
mod stats;

pub use adversary::{ConstantPlayers, CrowdingAdversary, PlayerAdversary, RoundView};
pub use stats::{
    collective_sampling_stats, estimate_leader_quality, survivor_claim_check, RunStats, SamplingStats, SurvivorClaim,
};

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::dist::prefix_bits;
use crate::error::{invalid, over_budget, Error, Result};
use crate::sources::{worst_case_distance, BlockFunction, GoodBlockModel, SourceSpec};
use crate::trial_rng;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RoundKind {
    /// Survivors each name a bin in `0..bins`; the least populated bin
    /// survives, ties to the lowest index, empty bins included.
    LightestBin { bins: usize },
    /// The first survivor names one of the other survivors as leader.
    IndexElection,
    /// Survivors each send `width` bits.
    Broadcast { width: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutcomeRule {
    /// Leader named by an index election, otherwise the lowest survivor.
    Elected,
    Fixed { leader: usize },
    /// XOR of the messages of the last broadcast round.
    Xor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutcomeDomain {
    Leader,
    Bit,
    String { m: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Outcome {
    Leader(usize),
    NoLeader,
    Value(u64),
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Outcome::Leader(j) => write!(f, "leader:{j}"),
            Outcome::NoLeader => write!(f, "none"),
            Outcome::Value(v) => write!(f, "value:{v:x}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub players: usize,
    pub rounds: Vec<RoundKind>,
    pub outcome: OutcomeRule,
}

/// Bits the first survivor sends in an index election among `p` players.
pub fn index_bits(p: usize) -> u32 {
    let others = p.saturating_sub(1).max(1) as u64;
    (u64::BITS - (others - 1).leading_zeros()).max(1)
}

impl ProtocolSpec {
    pub fn validate(&self) -> Result<()> {
        if self.players == 0 {
            return Err(invalid("players", "must be positive"));
        }
        // A fixed leader needs no communication; every other rule needs a round.
        if self.rounds.is_empty() && !matches!(self.outcome, OutcomeRule::Fixed { .. }) {
            return Err(invalid("rounds", "at least one round required"));
        }
        for r in &self.rounds {
            match *r {
                RoundKind::LightestBin { bins } if bins < 2 => return Err(invalid("bins", "need at least 2 bins")),
                RoundKind::Broadcast { width } if width == 0 || width > 32 => {
                    return Err(invalid("width", format!("{width} outside 1..=32")))
                }
                _ => {}
            }
        }
        match self.outcome {
            OutcomeRule::Fixed { leader } if leader == 0 || leader > self.players => {
                Err(Error::IndexOutOfRange { index: leader, len: self.players })
            }
            OutcomeRule::Xor if self.xor_width().is_none() => Err(invalid("outcome", "xor needs a broadcast round")),
            _ => Ok(()),
        }
    }

    fn xor_width(&self) -> Option<u32> {
        self.rounds.iter().rev().find_map(|r| match r {
            RoundKind::Broadcast { width } => Some(*width),
            _ => None,
        })
    }

    pub fn domain(&self) -> OutcomeDomain {
        match self.outcome {
            OutcomeRule::Xor => match self.xor_width() {
                Some(1) => OutcomeDomain::Bit,
                w => OutcomeDomain::String { m: w.unwrap_or(0) },
            },
            _ => OutcomeDomain::Leader,
        }
    }

    /// Number of leading lightest-bin rounds.
    pub fn stage_one_rounds(&self) -> usize {
        self.rounds.iter().take_while(|r| matches!(r, RoundKind::LightestBin { .. })).count()
    }

    pub fn stage_one_bins(&self) -> Vec<usize> {
        self.rounds
            .iter()
            .map_while(|r| match r {
                RoundKind::LightestBin { bins } => Some(*bins),
                _ => None,
            })
            .collect()
    }
}

/// Messages of one round, sorted by player.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based round number.
    pub round: usize,
    pub messages: Vec<(usize, u64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolRun {
    pub outcome: Outcome,
    pub transcript: Vec<RoundRecord>,
    /// `(p_i, g_i)`: survivors and good survivors entering round `i`,
    /// then after the last round.
    pub trajectory: Vec<(usize, usize)>,
}

impl ProtocolRun {
    /// One JSON object per message: `{"round", "player", "message"}` with
    /// the message in lowercase hex.
    pub fn transcript_lines(&self) -> Vec<String> {
        self.transcript
            .iter()
            .flat_map(|r| {
                r.messages.iter().map(move |&(p, m)| {
                    serde_json::json!({ "round": r.round, "player": p, "message": format!("{m:x}") }).to_string()
                })
            })
            .collect()
    }
}

/// Execution state between rounds.
#[derive(Clone, Debug)]
pub(crate) struct Exec<'a> {
    spec: &'a ProtocolSpec,
    survivors: Vec<usize>,
    leader: Option<usize>,
    xor: u64,
}

impl<'a> Exec<'a> {
    pub(crate) fn new(spec: &'a ProtocolSpec) -> Self {
        Exec { spec, survivors: (1..=spec.players).collect(), leader: None, xor: 0 }
    }

    /// Speakers of round `r` and the size of their message domain.
    pub(crate) fn speakers(&self, r: usize) -> (Vec<usize>, u64) {
        match self.spec.rounds[r] {
            RoundKind::LightestBin { bins } => (self.survivors.clone(), bins as u64),
            RoundKind::IndexElection if self.survivors.len() >= 2 => {
                (vec![self.survivors[0]], 1u64 << index_bits(self.survivors.len()))
            }
            RoundKind::IndexElection => (Vec::new(), 1),
            RoundKind::Broadcast { width } => (self.survivors.clone(), 1u64 << width),
        }
    }

    /// Applies round `r` given every speaker's message, sorted by player.
    pub(crate) fn apply(&mut self, r: usize, messages: &[(usize, u64)]) {
        match self.spec.rounds[r] {
            RoundKind::LightestBin { bins } => {
                let mut counts = vec![0usize; bins];
                for &(_, m) in messages {
                    counts[m as usize] += 1;
                }
                let light = (0..bins).min_by_key(|&b| (counts[b], b)).expect("bins >= 2");
                self.survivors = messages.iter().filter(|&&(_, m)| m as usize == light).map(|&(p, _)| p).collect();
            }
            RoundKind::IndexElection => {
                if let Some(&(_, v)) = messages.first() {
                    let others = &self.survivors[1..];
                    self.leader = Some(others[(v % others.len() as u64) as usize]);
                }
            }
            RoundKind::Broadcast { .. } => {
                self.xor = messages.iter().fold(0, |a, &(_, m)| a ^ m);
            }
        }
    }

    pub(crate) fn outcome(&self) -> Outcome {
        match self.spec.outcome {
            OutcomeRule::Elected => match self.leader.or_else(|| self.survivors.first().copied()) {
                Some(j) => Outcome::Leader(j),
                None => Outcome::NoLeader,
            },
            OutcomeRule::Fixed { leader } => Outcome::Leader(leader),
            OutcomeRule::Xor => Outcome::Value(self.xor),
        }
    }
}

/// Merges good and bad messages after checking that `bad` answers for
/// exactly the bad speakers, inside the domain.
pub(crate) fn merge_messages(
    good: &[(usize, u64)],
    bad_speakers: &[usize],
    mut bad: Vec<(usize, u64)>,
    domain: u64,
) -> Result<Vec<(usize, u64)>> {
    bad.sort_unstable();
    if bad.len() != bad_speakers.len() || bad.iter().zip(bad_speakers).any(|(a, &p)| a.0 != p) {
        return Err(Error::Protocol(format!(
            "adversary sent {} messages for {} bad speakers",
            bad.len(),
            bad_speakers.len()
        )));
    }
    if let Some(&(p, m)) = bad.iter().find(|&&(_, m)| m >= domain) {
        return Err(Error::Protocol(format!("player {p} sent {m}, outside 0..{domain}")));
    }
    let mut all: Vec<(usize, u64)> = good.iter().copied().chain(bad).collect();
    all.sort_unstable();
    Ok(all)
}

pub(crate) fn run_with_rng<R: Rng + ?Sized>(
    spec: &ProtocolSpec,
    adv: &dyn PlayerAdversary,
    rng: &mut R,
) -> Result<ProtocolRun> {
    let bad_set = adv.bad_set();
    if let Some(&p) = bad_set.iter().find(|&&p| p == 0 || p > spec.players) {
        return Err(Error::IndexOutOfRange { index: p, len: spec.players });
    }
    let mut exec = Exec::new(spec);
    let mut transcript = Vec::with_capacity(spec.rounds.len());
    let mut trajectory = Vec::with_capacity(spec.rounds.len() + 1);
    let count_good = |s: &[usize]| s.iter().filter(|p| !bad_set.contains(p)).count();
    for r in 0..spec.rounds.len() {
        trajectory.push((exec.survivors.len(), count_good(&exec.survivors)));
        let (speakers, domain) = exec.speakers(r);
        let (bad_speakers, good_speakers): (Vec<usize>, Vec<usize>) =
            speakers.iter().partition(|p| bad_set.contains(p));
        let good: Vec<(usize, u64)> = good_speakers.iter().map(|&p| (p, rng.random_range(0..domain))).collect();
        let bad = if bad_speakers.is_empty() {
            Vec::new()
        } else {
            adv.respond(&RoundView {
                round: r + 1,
                kind: &spec.rounds[r],
                survivors: &exec.survivors,
                speakers: &speakers,
                domain,
                good: &good,
                bad: &bad_speakers,
                transcript: &transcript,
            })?
        };
        let messages = merge_messages(&good, &bad_speakers, bad, domain)?;
        exec.apply(r, &messages);
        transcript.push(RoundRecord { round: r + 1, messages });
    }
    trajectory.push((exec.survivors.len(), count_good(&exec.survivors)));
    Ok(ProtocolRun { outcome: exec.outcome(), transcript, trajectory })
}

/// Runs `spec` once. Good messages come from `trial_rng(seed, 0)`, so the
/// transcript is a function of the seed.
pub fn run_protocol(spec: &ProtocolSpec, adv: &dyn PlayerAdversary, seed: u64) -> Result<ProtocolRun> {
    spec.validate()?;
    run_with_rng(spec, adv, &mut trial_rng(seed, 0))
}

pub fn lightest_bin_round(messages: &[(usize, u64)], bins: usize) -> Result<Vec<usize>> {
    if bins < 2 {
        return Err(invalid("bins", "need at least 2 bins"));
    }
    if messages.is_empty() {
        return Err(invalid("messages", "no active players"));
    }
    if let Some(&(p, m)) = messages.iter().find(|&&(_, m)| m >= bins as u64) {
        return Err(invalid("messages", format!("player {p} chose bin {m} of {bins}")));
    }
    let spec = ProtocolSpec { players: 0, rounds: vec![RoundKind::LightestBin { bins }], outcome: OutcomeRule::Elected };
    let mut exec = Exec::new(&spec);
    let mut sorted = messages.to_vec();
    sorted.sort_unstable();
    exec.apply(0, &sorted);
    Ok(exec.survivors)
}

/// Leader chosen by the first of `players` from its message `value`:
/// `players[1 + value mod (p - 1)]`, or the only player when `p = 1`.
pub fn final_stage_index_election(players: &[usize], value: u64, bits: u32) -> Result<usize> {
    match players.len() {
        0 => Err(invalid("players", "empty")),
        1 => Ok(players[0]),
        p => {
            let need = index_bits(p);
            if bits < need {
                return Err(invalid("bits", format!("{bits} bits, need {need}")));
            }
            Ok(players[1 + (value % (p as u64 - 1)) as usize])
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    OneBit,
    MultiBit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinalStage {
    IndexElection,
    LowestSurvivor,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageConstants {
    pub c0: f64,
    pub c1: f64,
    /// Bad fraction the multi-bit stopping size is tuned for.
    pub delta: f64,
}

impl StageConstants {
    /// One-bit stage-1 target `floor(c0 log2 ell)`.
    pub fn one_bit_threshold(&self, ell: usize) -> usize {
        (self.c0 * (ell as f64).log2()).floor() as usize
    }

    /// Multi-bit stopping size `exp((log2(1/delta))^c1)`.
    pub fn multi_bit_threshold(&self) -> f64 {
        (1.0 / self.delta).log2().powf(self.c1).exp()
    }
}

fn ceil_log2(p: usize) -> u32 {
    usize::BITS - (p - 1).leading_zeros()
}

/// Bin counts of the stage-1 rounds, planned on the largest possible
/// survivor count `p_{i+1} = ceil(p_i / b_i)`.
pub fn stage_one_schedule(ell: usize, variant: Variant, c: &StageConstants) -> Result<Vec<usize>> {
    if ell < 2 {
        return Err(invalid("ell", "need at least 2 players"));
    }
    if !(c.c0 > 0.0 && c.c1 > 0.0) {
        return Err(invalid("constants", "c0 and c1 must be positive"));
    }
    let mut bins = Vec::new();
    let mut p = ell;
    match variant {
        Variant::OneBit => {
            let stop = c.one_bit_threshold(ell).max(1);
            while p > stop {
                bins.push(2);
                p = p.div_ceil(2);
            }
        }
        Variant::MultiBit => {
            if !(c.delta > 0.0 && c.delta < 1.0) {
                return Err(invalid("delta", format!("{} outside (0, 1)", c.delta)));
            }
            let stop = c.multi_bit_threshold();
            while p >= 2 {
                let b = ((p as f64 / (ceil_log2(p) as f64).powf(c.c0)).floor() as usize).max(2);
                if (p as f64 / b as f64) < stop {
                    break;
                }
                bins.push(b);
                p = p.div_ceil(b);
            }
        }
    }
    let cap = ceil_log2(ell) as usize;
    if bins.len() > cap {
        return Err(Error::Protocol(format!("{} stage-1 rounds exceed log2 ell = {cap}", bins.len())));
    }
    Ok(bins)
}

/// Stage-1 lightest-bin rounds followed by the final stage.
pub fn two_stage_leader_election(
    ell: usize,
    variant: Variant,
    constants: &StageConstants,
    final_stage: FinalStage,
) -> Result<ProtocolSpec> {
    let mut rounds: Vec<RoundKind> = stage_one_schedule(ell, variant, constants)?
        .into_iter()
        .map(|bins| RoundKind::LightestBin { bins })
        .collect();
    if final_stage == FinalStage::IndexElection {
        rounds.push(RoundKind::IndexElection);
    }
    if rounds.is_empty() {
        // Lowest survivor with nothing to do: elect player 1 directly.
        return Ok(ProtocolSpec { players: ell, rounds, outcome: OutcomeRule::Fixed { leader: 1 } });
    }
    Ok(ProtocolSpec { players: ell, rounds, outcome: OutcomeRule::Elected })
}

/// Message player `j` sends in round `r` when the round reads an `n`-bit
/// block.
fn block_message(kind: &RoundKind, block: u64, n: u32, domain: u64) -> Result<u64> {
    Ok(match kind {
        RoundKind::LightestBin { .. } => block % domain,
        RoundKind::IndexElection => {
            let w = domain.trailing_zeros();
            if w > n {
                return Err(invalid("n", format!("index election needs {w} bits, blocks have {n}")));
            }
            prefix_bits(block, n, w)
        }
        RoundKind::Broadcast { width } => {
            if *width != n {
                return Err(invalid("n", format!("broadcast width {width} differs from block width {n}")));
            }
            block
        }
    })
}

/// Runs `spec` with block `(i, j)` as player `j`'s round-`i` message and
/// returns block `(r, j*)` for the elected leader `j*`, or block `(r, 1)`
/// when nobody is elected. Blocks are in round-major order.
pub fn extractor_from_protocol(spec: &ProtocolSpec, blocks: &[u64], n: u32) -> Result<u64> {
    spec.validate()?;
    if spec.domain() != OutcomeDomain::Leader {
        return Err(invalid("spec", "protocol must elect a leader"));
    }
    let ell = spec.players;
    let r = spec.rounds.len() + 1;
    if blocks.len() != ell * r {
        return Err(invalid("blocks", format!("{} blocks, expected ell * r = {}", blocks.len(), ell * r)));
    }
    let mut exec = Exec::new(spec);
    for round in 0..spec.rounds.len() {
        let (speakers, domain) = exec.speakers(round);
        let messages = speakers
            .iter()
            .map(|&p| Ok((p, block_message(&spec.rounds[round], blocks[round * ell + p - 1], n, domain)?)))
            .collect::<Result<Vec<_>>>()?;
        exec.apply(round, &messages);
    }
    let leader = match exec.outcome() {
        Outcome::Leader(j) => j,
        _ => 1,
    };
    Ok(blocks[(r - 1) * ell + leader - 1])
}

/// `max_A Pr[outcome is not a good leader]` over every adversary that
/// controls `bad`, by backward induction over rounds.
pub fn exact_bad_leader_probability(spec: &ProtocolSpec, bad: &BTreeSet<usize>, budget: &Budget) -> Result<f64> {
    spec.validate()?;
    if spec.domain() != OutcomeDomain::Leader {
        return Err(invalid("spec", "protocol must elect a leader"));
    }
    let mut work = 0u64;
    value(&Exec::new(spec), 0, bad, budget, &mut work)
}

fn value(exec: &Exec, r: usize, bad: &BTreeSet<usize>, budget: &Budget, work: &mut u64) -> Result<f64> {
    if r == exec.spec.rounds.len() {
        return Ok(match exec.outcome() {
            Outcome::Leader(j) if !bad.contains(&j) => 0.0,
            _ => 1.0,
        });
    }
    let (speakers, domain) = exec.speakers(r);
    let (bad_sp, good_sp): (Vec<usize>, Vec<usize>) = speakers.iter().partition(|p| bad.contains(p));
    let goods = checked_pow(domain, good_sp.len(), budget)?;
    let bads = checked_pow(domain, bad_sp.len(), budget)?;
    *work += goods * bads;
    if *work > budget.strategies {
        return Err(over_budget("protocol adversary search", *work, budget.strategies));
    }
    let mut total = 0.0;
    let mut messages = vec![(0usize, 0u64); speakers.len()];
    for g in 0..goods {
        let mut best = 0.0f64;
        for b in 0..bads {
            let (mut gi, mut bi) = (g, b);
            for (slot, &p) in messages.iter_mut().zip(&speakers) {
                let v = if bad.contains(&p) {
                    let v = bi % domain;
                    bi /= domain;
                    v
                } else {
                    let v = gi % domain;
                    gi /= domain;
                    v
                };
                *slot = (p, v);
            }
            let mut next = exec.clone();
            next.apply(r, &messages);
            best = best.max(value(&next, r + 1, bad, budget, work)?);
            if best == 1.0 {
                break;
            }
        }
        total += best;
    }
    Ok(total / goods as f64)
}

fn checked_pow(base: u64, exp: usize, budget: &Budget) -> Result<u64> {
    u32::try_from(exp)
        .ok()
        .and_then(|e| base.checked_pow(e))
        .filter(|&v| v <= budget.strategies)
        .ok_or_else(|| over_budget("protocol message combinations", format!("{base}^{exp}"), budget.strategies))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractorComparison {
    /// Bad blocks in round-major order, 1-based.
    pub bad_blocks: Vec<usize>,
    /// Players owning a bad block.
    pub bad_players: Vec<usize>,
    /// Exact worst-case distance of the composed extractor from uniform.
    pub extractor_error: f64,
    pub bad_leader_probability: f64,
}

/// Exact error of `extractor_from_protocol` on the uniform block source
/// with the given bad blocks, next to the exact bad-leader probability of
/// the protocol whose bad players own those blocks.
pub fn compare_extractor_with_protocol(
    spec: &ProtocolSpec,
    n: u32,
    bad_blocks: &[usize],
    budget: &Budget,
) -> Result<ExtractorComparison> {
    let ell = spec.players;
    let total = ell * (spec.rounds.len() + 1);
    let f = BlockFunction::from_fn(total, n, n, |b| extractor_from_protocol(spec, b, n).unwrap_or(0))?;
    // Surface configuration errors that the table build would hide.
    extractor_from_protocol(spec, &vec![0; total], n)?;
    let source = SourceSpec::new(total, n, n, bad_blocks.iter().copied())?;
    let bad_players: BTreeSet<usize> = bad_blocks.iter().map(|&b| (b - 1) % ell + 1).collect();
    Ok(ExtractorComparison {
        bad_blocks: bad_blocks.to_vec(),
        extractor_error: worst_case_distance(&f, &source, &GoodBlockModel::Uniform, budget)?,
        bad_leader_probability: exact_bad_leader_probability(spec, &bad_players, budget)?,
        bad_players: bad_players.into_iter().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lightest_bin_examples() {
        let eight: Vec<(usize, u64)> = (1..=8).map(|p| (p, (p > 5) as u64)).collect();
        assert_eq!(lightest_bin_round(&eight, 2).unwrap(), vec![6, 7, 8]);
        let tie: Vec<(usize, u64)> = (1..=8).map(|p| (p, (p % 2) as u64)).collect();
        assert_eq!(lightest_bin_round(&tie, 2).unwrap(), vec![2, 4, 6, 8]);
        let three = [(1, 0), (2, 0), (3, 1), (4, 1), (5, 1), (6, 1), (7, 1), (8, 2)];
        assert_eq!(lightest_bin_round(&three, 3).unwrap(), vec![8]);
        assert!(lightest_bin_round(&[], 2).is_err());
    }

    #[test]
    fn index_election_examples() {
        assert_eq!(final_stage_index_election(&[4, 9], 1, 1).unwrap(), 9);
        assert_eq!(final_stage_index_election(&[1, 2, 3], 0, 1).unwrap(), 2);
        assert_eq!(final_stage_index_election(&[1, 2, 3], 1, 1).unwrap(), 3);
        assert!(final_stage_index_election(&[1, 2, 3, 4, 5], 0, 1).is_err());
        assert_eq!(index_bits(2), 1);
        assert_eq!(index_bits(5), 2);
        assert_eq!(index_bits(6), 3);
    }

    #[test]
    fn schedules() {
        let c = StageConstants { c0: 3.2, c1: 1.5, delta: 0.1 };
        assert_eq!(c.one_bit_threshold(1024), 32);
        assert_eq!(stage_one_schedule(1024, Variant::OneBit, &c).unwrap(), vec![2; 5]);
        assert!(stage_one_schedule(8, Variant::OneBit, &c).unwrap().is_empty());
        let m = StageConstants { c0: 3.0, c1: 1.5, delta: 0.1 };
        let big = stage_one_schedule(1_000_000, Variant::MultiBit, &m).unwrap();
        assert!(big.len() <= 5, "{big:?}");
        assert_eq!(big[0], 125);
    }

    #[test]
    fn zero_stage_one_rounds_elects_directly() {
        let c = StageConstants { c0: 10.0, c1: 1.5, delta: 0.1 };
        let s = two_stage_leader_election(8, Variant::OneBit, &c, FinalStage::IndexElection).unwrap();
        assert_eq!(s.rounds, vec![RoundKind::IndexElection]);
    }

    #[test]
    fn fixed_leader_extractor_outputs_last_round_block() {
        let spec = ProtocolSpec { players: 3, rounds: vec![], outcome: OutcomeRule::Fixed { leader: 1 } };
        assert_eq!(extractor_from_protocol(&spec, &[5, 6, 7], 3).unwrap(), 5);
        assert!(extractor_from_protocol(&spec, &[5, 6], 3).is_err());
    }

    #[test]
    fn index_election_extractor_matches_address_construction() {
        // Round 1: player 1 names one of players 2, 3; round 2 block of the leader.
        let spec = ProtocolSpec { players: 3, rounds: vec![RoundKind::IndexElection], outcome: OutcomeRule::Elected };
        assert_eq!(extractor_from_protocol(&spec, &[0, 1, 1, 0, 1, 0], 1).unwrap(), 1);
        assert_eq!(extractor_from_protocol(&spec, &[1, 1, 1, 0, 1, 0], 1).unwrap(), 0);
        let c = compare_extractor_with_protocol(&spec, 1, &[5], &Budget::default()).unwrap();
        assert_eq!(c.extractor_error, 0.25);
        assert_eq!(c.bad_leader_probability, 0.5);
    }

    #[test]
    fn rushing_adversary_exact_values() {
        let spec = ProtocolSpec { players: 3, rounds: vec![RoundKind::IndexElection], outcome: OutcomeRule::Elected };
        let b = Budget::default();
        assert_eq!(exact_bad_leader_probability(&spec, &BTreeSet::from([1]), &b).unwrap(), 0.0);
        assert_eq!(exact_bad_leader_probability(&spec, &BTreeSet::from([1, 2]), &b).unwrap(), 1.0);
        assert_eq!(exact_bad_leader_probability(&spec, &BTreeSet::from([3]), &b).unwrap(), 0.5);
        assert_eq!(exact_bad_leader_probability(&spec, &BTreeSet::new(), &b).unwrap(), 0.0);
    }

    #[test]
    fn xor_coin_last_player_fixes_outcome() {
        let spec = ProtocolSpec { players: 3, rounds: vec![RoundKind::Broadcast { width: 1 }], outcome: OutcomeRule::Xor };
        assert_eq!(spec.domain(), OutcomeDomain::Bit);
        let adv = CrowdingAdversary::new([3], 1);
        for seed in 0..20 {
            assert_eq!(run_protocol(&spec, &adv, seed).unwrap().outcome, Outcome::Value(1));
        }
    }

    #[test]
    fn transcripts_replay() {
        let c = StageConstants { c0: 1.0, c1: 1.5, delta: 0.1 };
        let spec = two_stage_leader_election(64, Variant::OneBit, &c, FinalStage::IndexElection).unwrap();
        let adv = CrowdingAdversary::new(1..=6, 0);
        let a = run_protocol(&spec, &adv, 7).unwrap();
        let b = run_protocol(&spec, &adv, 7).unwrap();
        assert_eq!(a.transcript_lines(), b.transcript_lines());
        assert_ne!(a.transcript, run_protocol(&spec, &adv, 8).unwrap().transcript);
        let line: serde_json::Value = serde_json::from_str(&a.transcript_lines()[0]).unwrap();
        assert_eq!(line["round"], 1);
        assert_eq!(line["player"], 1);
        for w in a.trajectory.windows(2).take(spec.stage_one_rounds()) {
            assert!(w[1].0 <= w[0].0.div_ceil(2));
        }
    }

    #[test]
    fn wrong_message_count_is_rejected() {
        assert!(merge_messages(&[(1, 0)], &[2, 3], vec![(2, 0)], 2).is_err());
        assert!(merge_messages(&[(1, 0)], &[2], vec![(2, 5)], 2).is_err());
        assert_eq!(merge_messages(&[(1, 0)], &[2], vec![(2, 1)], 2).unwrap(), vec![(1, 0), (2, 1)]);
    }
}
