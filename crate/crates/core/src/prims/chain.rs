// SPDX-License-Identifier: Apache-2.0

//! Chain rules for min-entropy and the control-few-bits bound, computed
//! exactly on explicit distributions.

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::dist::{enumerate_flat_sources, mask, smooth_min_entropy, Distribution, MAX_UNIVERSE_BITS};
use crate::error::{invalid, over_budget, Result};
use crate::joint::Joint;

use super::SeededCondenser;

/// Mass of `y` with `H_inf(X | Y = y) >= H_inf(X) - log|supp Y| - log(1/eps)`,
/// together with that threshold.
pub fn chain_rule_mass(joint: &Joint, x: &[usize], y: &[usize], eps: f64) -> Result<(f64, f64)> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(invalid("eps", format!("{eps} outside (0, 1]")));
    }
    let h = joint.min_entropy(x)?;
    let supp = joint.support_size(y)? as f64;
    let threshold = h - supp.log2() - (1.0 / eps).log2();
    let mass = joint
        .conditional_min_entropies(x, y)?
        .into_iter()
        .filter(|&(_, hy)| hy >= threshold - 1e-12)
        .map(|(p, _)| p)
        .sum();
    Ok((mass, threshold))
}

/// The three quantities ordered by the average-case chain rule
/// `H~(A | B, C) >= H~(A, B | C) - lambda >= H~(A | C) - lambda`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AverageChain {
    /// `log2 |supp B|`.
    pub lambda: f64,
    pub given_bc: f64,
    pub joint_ab_minus: f64,
    pub given_c_minus: f64,
}

impl AverageChain {
    pub fn holds(&self, tol: f64) -> bool {
        self.given_bc >= self.joint_ab_minus - tol && self.joint_ab_minus >= self.given_c_minus - tol
    }
}

pub fn average_chain_rule(joint: &Joint, a: &[usize], b: &[usize], c: &[usize]) -> Result<AverageChain> {
    let lambda = (joint.support_size(b)? as f64).log2();
    let bc: Vec<usize> = b.iter().chain(c).copied().collect();
    let ab: Vec<usize> = a.iter().chain(b).copied().collect();
    Ok(AverageChain {
        lambda,
        given_bc: joint.avg_conditional_min_entropy(a, &bc)?,
        joint_ab_minus: joint.avg_conditional_min_entropy(&ab, c)? - lambda,
        given_c_minus: joint.avg_conditional_min_entropy(a, c)? - lambda,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixingReport {
    /// Controlled bit positions, bit `i` of the input.
    pub controlled: Vec<u32>,
    pub eps: f64,
    /// `min` over fixings of `H_inf^eps(cond(X'))`.
    pub value: f64,
    pub cap: f64,
    pub binding_set: Vec<u64>,
}

/// Exact worst case of `H_inf^eps(cond(X'))` over every `X'` that keeps
/// the uncontrolled bits of the flat source `support` and sets the
/// controlled bits as a function of them, staying inside `support`.
///
/// Grouping `support` by its uncontrolled projection `g`, the adversary
/// picks one element per group, so the largest mass it can put on an
/// output set `S` is `D_S = sum_g w_g [group g can reach S]`. The cap is
/// then `max(2^-m, max_S (D_S - eps) / |S|)`.
pub fn worst_case_fixing(
    table: &[u32],
    in_bits: u32,
    m: u32,
    support: &[u64],
    controlled: &[u32],
    eps: f64,
) -> Result<FixingReport> {
    if in_bits > MAX_UNIVERSE_BITS || table.len() != 1usize << in_bits {
        return Err(invalid("table", format!("expected 2^{in_bits} entries")));
    }
    if m > 5 {
        return Err(over_budget("output bits for subset enumeration", m, 5));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(invalid("eps", format!("{eps} outside [0, 1)")));
    }
    if support.is_empty() || support.iter().any(|&x| x >> in_bits != 0) {
        return Err(invalid("support", "empty or outside the input width"));
    }
    if controlled.iter().any(|&i| i >= in_bits) {
        return Err(invalid("controlled", "bit position outside the input width"));
    }
    let cmask = controlled.iter().fold(0u64, |acc, &i| acc | (1 << i));
    let keep = mask(in_bits) & !cmask;
    // Reachable outputs per group, as a bitmask over {0,1}^m.
    let mut groups: std::collections::BTreeMap<u64, (u32, u64)> = Default::default();
    for &x in support {
        let e = groups.entry(x & keep).or_insert((0, 0));
        e.0 += 1;
        e.1 |= 1u64 << table[x as usize];
    }
    let total = support.len() as f64;
    let outs = 1u32 << m;
    let mut cap = 1.0 / outs as f64;
    let mut binding = 0u64;
    for s in 1..(1u64 << outs) {
        let d: f64 = groups.values().filter(|(_, r)| r & s != 0).map(|(w, _)| *w as f64).sum::<f64>() / total;
        let c = (d - eps) / s.count_ones() as f64;
        if c > cap {
            cap = c;
            binding = s;
        }
    }
    Ok(FixingReport {
        controlled: controlled.to_vec(),
        eps,
        value: -cap.log2(),
        cap,
        binding_set: (0..outs as u64).filter(|z| (binding >> z) & 1 == 1).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlBitsReport {
    pub eps: f64,
    pub max_b: u32,
    pub sources_checked: u64,
    /// `(X, controlled set)` pairs evaluated.
    pub cases: u64,
    /// Smallest `H_inf^{eps 2^b}(cond(X')) - (k_X - b)` seen, where
    /// `k_X = H_inf^eps(cond(X))`.
    pub min_slack: f64,
    /// Source support, controlled input bits, `k_X` and the worst value.
    pub witness: Option<(Vec<u64>, Vec<u32>, f64, f64)>,
    pub passed: bool,
}

/// Checks, for every flat `X` of min-entropy `k_in` on the source side
/// (the seed uniform) and every set of at most `max_b` controlled input
/// bits with `eps 2^b < 1`, that fixing those bits as functions of the rest
/// costs at most `b` bits of smooth min-entropy at error `eps 2^b`.
pub fn control_bits_check(
    cond: &SeededCondenser,
    k_in: u32,
    eps: f64,
    max_b: u32,
    budget: &Budget,
) -> Result<ControlBitsReport> {
    cond.map.validate()?;
    let w = cond.map.widths;
    let bits = w.n + w.d;
    if bits > 20 {
        return Err(over_budget("condenser input bits", bits, 20));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("eps", format!("{eps} outside (0, 1)")));
    }
    let table: Vec<u32> = (0..1u64 << bits).map(|i| cond.map.eval(i >> w.d, i & mask(w.d)) as u32).collect();
    let patterns: Vec<Vec<u32>> = (1..=max_b.min(bits))
        .filter(|&b| eps * (b as f64).exp2() < 1.0)
        .flat_map(|b| (0..bits).combinations(b as usize))
        .collect();
    let sources: Vec<_> = enumerate_flat_sources(w.n, k_in, budget)?.collect();
    type Worst = (f64, Option<(Vec<u64>, Vec<u32>, f64, f64)>);
    let results: Vec<Result<Worst>> = sources
        .par_iter()
        .map(|x| {
            let support: Vec<u64> = x.support.iter().flat_map(|&v| (0..1u64 << w.d).map(move |s| (v << w.d) | s)).collect();
            let mut probs = vec![0.0; 1 << w.m];
            for &i in &support {
                probs[table[i as usize] as usize] += 1.0 / support.len() as f64;
            }
            let k = smooth_min_entropy(&Distribution::new(w.m, probs)?, eps)?;
            let mut worst: Worst = (f64::INFINITY, None);
            for c in &patterns {
                let b = c.len() as u32;
                let r = worst_case_fixing(&table, bits, w.m, &support, c, eps * (b as f64).exp2())?;
                let slack = r.value - (k - b as f64);
                if slack < worst.0 {
                    worst = (slack, Some((x.support.clone(), c.clone(), k, r.value)));
                }
            }
            Ok(worst)
        })
        .collect();
    let mut best: Worst = (f64::INFINITY, None);
    for r in results {
        let r = r?;
        if r.0 < best.0 {
            best = r;
        }
    }
    Ok(ControlBitsReport {
        eps,
        max_b,
        sources_checked: sources.len() as u64,
        cases: (sources.len() * patterns.len()) as u64,
        min_slack: best.0,
        witness: best.1,
        passed: best.0 >= -1e-9,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{smooth_min_entropy, Distribution};

    #[test]
    fn chain_rule_on_independent_pair() {
        let j = Joint::from_weights(vec![2, 1], vec![1.0; 8]).unwrap();
        let (mass, t) = chain_rule_mass(&j, &[0], &[1], 0.5).unwrap();
        assert_eq!(t, 0.0);
        assert_eq!(mass, 1.0);
    }

    #[test]
    fn average_chain_on_copy() {
        // A = B uniform on 2 bits, C constant.
        let mut w = vec![0.0; 1 << 5];
        for a in 0..4usize {
            w[a | (a << 2)] = 1.0;
        }
        let j = Joint::from_weights(vec![2, 2, 1], w).unwrap();
        let r = average_chain_rule(&j, &[0], &[1], &[2]).unwrap();
        assert_eq!(r.lambda, 2.0);
        assert_eq!(r.given_bc, 0.0);
        assert_eq!(r.joint_ab_minus, 0.0);
        assert_eq!(r.given_c_minus, 0.0);
        assert!(r.holds(0.0));
    }

    /// Enumerates every fixing function directly.
    fn brute(table: &[u32], m: u32, support: &[u64], controlled: &[u32], eps: f64) -> f64 {
        let cmask = controlled.iter().fold(0u64, |acc, &i| acc | (1 << i));
        let mut groups: std::collections::BTreeMap<u64, Vec<u64>> = Default::default();
        for &x in support {
            groups.entry(x & !cmask).or_default().push(x);
        }
        let groups: Vec<(u64, Vec<u64>)> = groups.into_iter().collect();
        let choices: usize = groups.iter().map(|(_, g)| g.len()).product();
        let mut worst = f64::INFINITY;
        for mut c in 0..choices {
            let mut p = vec![0.0; 1 << m];
            for (_, g) in &groups {
                let pick = g[c % g.len()];
                c /= g.len();
                p[table[pick as usize] as usize] += g.len() as f64 / support.len() as f64;
            }
            worst = worst.min(smooth_min_entropy(&Distribution::new(m, p).unwrap(), eps).unwrap());
        }
        worst
    }

    #[test]
    fn control_bits_on_identity_condenser() {
        // Identity on (x, s): fixing b bits of a flat source loses at most b bits.
        let table = (0..1u32 << 4).collect();
        let map = super::super::SeededMap { widths: super::super::SeededWidths { n: 3, d: 1, m: 4 }, kind: super::super::SeededKind::Table { table } };
        let r = control_bits_check(&SeededCondenser { map }, 2, 0.05, 3, &Budget::default()).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.sources_checked, 70);
    }

    #[test]
    fn fixing_matches_brute_force() {
        let table: Vec<u32> = (0..32u32).map(|x| (x * 7 + (x >> 2)) % 4).collect();
        let support = [1u64, 4, 6, 9, 13, 18, 22, 31];
        for controlled in [vec![0u32], vec![1, 3], vec![0, 2, 4]] {
            for eps in [0.0, 0.1, 0.3] {
                let r = worst_case_fixing(&table, 5, 2, &support, &controlled, eps).unwrap();
                let b = brute(&table, 2, &support, &controlled, eps);
                assert!((r.value - b).abs() < 1e-9, "{controlled:?} {eps}: {} vs {b}", r.value);
            }
        }
    }
}
