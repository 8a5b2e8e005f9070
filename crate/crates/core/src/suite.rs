// SPDX-License-Identifier: Apache-2.0

//! Invariant suite behind `verify-all`. Sizes scale with the budget preset.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::boolfn::{
    fourier_transform, influences, make_named_function, online_influence_fourier, online_influences, poincare_report,
    BooleanFunction, NamedFunction,
};
use crate::budget::Budget;
use crate::error::Result;
use crate::joint::Joint;
use crate::pipelines::{
    address_extractor_error, exact_good_outputs, good_output_count, sliding_window_check, xor_entropy_check,
    SlidingWindowCase,
};
use crate::prims::{
    average_chain_rule, chain_rule_mass, control_bits_check, inner_product_2ext, lhl_extractor, search_object,
    SearchSpec, SearchedObject, SeededWidths,
};
use crate::protocols::{
    compare_extractor_with_protocol, survivor_claim_check, two_stage_leader_election, CrowdingAdversary, FinalStage,
    OutcomeRule, ProtocolSpec, RoundKind, StageConstants, Variant,
};
use crate::sources::{brute_force_oi_b, optimal_online_bias, GoodBlockModel, SourceSpec};
use crate::{attacks, trial_rng};

const TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub passed: bool,
    /// Instances evaluated.
    pub cases: u64,
    pub detail: String,
}

/// How many random instances each check draws.
fn scale(budget: &Budget) -> u64 {
    if budget.flat_sources <= Budget::small().flat_sources {
        1
    } else if budget.flat_sources <= Budget::default().flat_sources {
        4
    } else {
        16
    }
}

fn result(id: &str, passed: bool, cases: u64, detail: impl Into<String>) -> CheckResult {
    CheckResult { id: id.into(), passed, cases, detail: detail.into() }
}

fn poincare(s: u64) -> Result<CheckResult> {
    let mut cases = 0;
    let mut bad = 0;
    for t in 0..256u64 {
        let f = BooleanFunction::from_fn(3, |x| (t >> x) & 1 == 1)?;
        let r = poincare_report(&f);
        bad += (r.lower_violated || r.upper_violated) as u64;
        cases += 1;
    }
    for t in 0..100 * s {
        let f = BooleanFunction::random(8, t)?;
        let r = poincare_report(&f);
        bad += (r.lower_violated || r.upper_violated) as u64;
        cases += 1;
    }
    Ok(result("poincare", bad == 0, cases, format!("{bad} violations")))
}

fn fourier_and_sandwich(s: u64) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut sandwich_bad = 0;
    let mut cases = 0;
    for t in 0..50 * s {
        let ell = 2 + (t % 9) as u32;
        let f = BooleanFunction::random(ell, 1000 + t)?;
        let spec = fourier_transform(&f);
        for (i, oi) in online_influences(&f).into_iter().enumerate() {
            worst = worst.max((oi - online_influence_fourier(&spec, i + 1)?).abs());
            let w = spec.prefix_weight(i + 1)?;
            sandwich_bad += (oi * oi > w + TOL || w > oi + TOL) as u64;
        }
        cases += 1;
    }
    Ok(result(
        "fourier-sandwich",
        worst <= TOL && sandwich_bad == 0,
        cases,
        format!("max |oI - fourier| = {worst:.3e}, sandwich violations {sandwich_bad}"),
    ))
}

fn address() -> Result<CheckResult> {
    let mut ok = true;
    for a in 1..=3u32 {
        let ell = (1u32 << a) + a;
        let f = make_named_function(&NamedFunction::Address, ell)?;
        let oi = online_influences(&f);
        let inf = influences(&f);
        let data = 1.0 / (1u32 << a) as f64;
        ok &= oi[..a as usize].iter().all(|&v| v.abs() <= TOL);
        ok &= oi[a as usize..].iter().all(|&v| (v - data).abs() <= TOL);
        ok &= inf[a as usize..].iter().all(|&v| (v - data).abs() <= TOL);
        ok &= inf[..a as usize].iter().all(|&v| v > 0.0);
    }
    Ok(result("address-influence", ok, 3, "a in {1, 2, 3}"))
}

fn oi_b_dp() -> Result<CheckResult> {
    let budget = Budget::default();
    let mut mismatches = 0;
    let mut cases = 0;
    for t in 0..256u64 {
        let f = BooleanFunction::from_fn(3, |x| (t >> x) & 1 == 1)?;
        for bad in [vec![1], vec![2], vec![3], vec![1, 3], vec![2, 3]] {
            let spec = SourceSpec::new(3, 1, 1, bad)?;
            let dp = optimal_online_bias(&f, &spec, &GoodBlockModel::Uniform, &budget)?;
            let bf = brute_force_oi_b(&f, &spec, &GoodBlockModel::Uniform, &budget)?;
            mismatches += (dp.max_e != bf.max_e || dp.min_e != bf.min_e) as u64;
            cases += 1;
        }
    }
    Ok(result("oi-b-dp", mismatches == 0, cases, format!("{mismatches} mismatches")))
}

fn greedy(s: u64, budget: &Budget) -> Result<CheckResult> {
    let mut bad = 0;
    for t in 0..5 * s {
        let f = BooleanFunction::random_balanced_with(8, &mut trial_rng(77, t))?;
        let cert = attacks::greedy_coalition(&f, 0.6, budget)?;
        let replay = attacks::replay_certificate(&f, &cert, budget)?;
        bad += (cert.achieved_expectation < 0.6 - TOL
            || (replay - cert.achieved_expectation).abs() > TOL
            || cert.coalition.len() as f64 > cert.proven_size_bound) as u64;
    }
    let mut imp_bad = 0;
    let mut balanced = 0;
    for t in 0..1u64 << 16 {
        if t.count_ones() != 8 || t % (997 / s.min(997)).max(1) != 0 {
            continue;
        }
        let f = BooleanFunction::from_fn(4, |x| (t >> x) & 1 == 1)?;
        let c = attacks::extraction_impossibility(&f, 0.1, budget)?;
        imp_bad += (c.bias < 0.1 - TOL || c.certificate.coalition.len() > 2) as u64;
        balanced += 1;
    }
    Ok(result(
        "greedy-impossibility",
        bad == 0 && imp_bad == 0,
        5 * s + balanced,
        format!("greedy failures {bad}, impossibility failures {imp_bad}"),
    ))
}

fn address_extractor(budget: &Budget) -> Result<CheckResult> {
    // Exact error is (1 - 2^-n) times the largest index probability.
    let mut ok = true;
    for ell in 3..=5usize {
        let n = (usize::BITS - (ell - 2).leading_zeros()).max(1);
        let hits = |j: usize| -> f64 {
            let w = 1u64 << n;
            (0..w).filter(|v| (v % (ell as u64 - 1)) as usize + 2 == j).count() as f64 / w as f64
        };
        for j in 1..=ell {
            let err = address_extractor_error(ell, n, &[j], budget)?;
            let want = if j == 1 { 0.0 } else { hits(j) * (1.0 - 1.0 / (1u64 << n) as f64) };
            ok &= (err - want).abs() <= TOL;
        }
    }
    Ok(result("address-extractor", ok, 12, "ell in 3..=5, one bad block"))
}

fn chain_rules(s: u64) -> Result<CheckResult> {
    let mut bad = 0;
    for t in 0..50 * s {
        let mut rng = trial_rng(91, t);
        let w: Vec<f64> = (0..1 << 5).map(|_| if rng.random_bool(0.7) { rng.random::<f64>() } else { 0.0 }).collect();
        let Ok(j) = Joint::from_weights(vec![2, 2, 1], w) else { continue };
        let (mass, _) = chain_rule_mass(&j, &[0], &[1], 0.25)?;
        bad += (mass < 0.75 - TOL) as u64;
        bad += !average_chain_rule(&j, &[0], &[1], &[2])?.holds(TOL) as u64;
    }
    Ok(result("chain-rules", bad == 0, 50 * s, format!("{bad} violations")))
}

fn control_bits(s: u64, budget: &Budget) -> Result<CheckResult> {
    let spec = SearchSpec::SeededCond { widths: SeededWidths { n: 4, d: 1, m: 3 }, k_in: 1, k_out: 1.0, eps: 0.1 };
    let mut worst = f64::INFINITY;
    for seed in 0..s.min(4) {
        let SearchedObject::SeededCond(c) = search_object(&spec, seed, 1000, budget)?.object else {
            unreachable!("spec kind")
        };
        worst = worst.min(control_bits_check(&c, 1, 0.05, 3, budget)?.min_slack);
    }
    Ok(result("control-bits", worst >= -TOL, s.min(4), format!("min slack {worst:.4e}")))
}

fn sliding_window(budget: &Budget) -> Result<CheckResult> {
    let spec = SourceSpec::new(4, 2, 2, [2])?;
    let case = SlidingWindowCase {
        goods: GoodBlockModel::Uniform,
        spec,
        two_ext: inner_product_2ext(2, 1)?,
        d: 1,
        battery: 16,
        seed: 0,
    };
    let r = sliding_window_check(&case, budget)?;
    Ok(result("sliding-window", r.passed, r.strategies as u64, format!("min margin {:.4e}", r.min_margin)))
}

fn xor_entropy(budget: &Budget) -> Result<CheckResult> {
    let e = lhl_extractor(4, 1)?;
    let exts = vec![e.clone(), e];
    let mut ok = true;
    for j in 1..=2 {
        ok &= xor_entropy_check(&exts, 3, j, budget)?.passed;
    }
    Ok(result("xor-entropy", ok, 2, "two Toeplitz extractors, k = 3"))
}

fn survivors(s: u64) -> Result<CheckResult> {
    let c = StageConstants { c0: 3.0, c1: 1.5, delta: 0.1 };
    let spec = two_stage_leader_election(256, Variant::OneBit, &c, FinalStage::IndexElection)?;
    let adv = CrowdingAdversary::new(1..=25, 0);
    let r = survivor_claim_check(&spec, Variant::OneBit, &adv, 500 * s, 1)?;
    Ok(result("survivor-claim", r.fraction >= 0.99, r.trials, format!("fraction {:.4}", r.fraction)))
}

fn protocol_extractor(budget: &Budget) -> Result<CheckResult> {
    let mut bad = 0;
    let mut cases = 0;
    for ell in 2..=3usize {
        let specs = [
            ProtocolSpec { players: ell, rounds: vec![RoundKind::IndexElection], outcome: OutcomeRule::Elected },
            ProtocolSpec { players: ell, rounds: vec![RoundKind::LightestBin { bins: 2 }], outcome: OutcomeRule::Elected },
        ];
        for spec in &specs {
            for mask in 1u32..(1 << (2 * ell)) - 1 {
                let blocks: Vec<usize> = (1..=2 * ell).filter(|b| (mask >> (b - 1)) & 1 == 1).collect();
                let c = compare_extractor_with_protocol(spec, 1, &blocks, budget)?;
                bad += (c.extractor_error > c.bad_leader_probability + TOL) as u64;
                cases += 1;
            }
        }
    }
    Ok(result("protocol-extractor", bad == 0, cases, format!("{bad} violations")))
}

fn good_outputs() -> Result<CheckResult> {
    let mut bad = 0;
    let mut cases = 0;
    for ell in 2..=10usize {
        for mask in 1u32..1 << ell {
            let good: Vec<bool> = (0..ell).map(|i| (mask >> i) & 1 == 1).collect();
            let g = mask.count_ones() as i64;
            for d in 1..=ell {
                let bound = good_output_count(g, ell as i64, d as i64)?;
                bad += (num_rational::Ratio::from_integer(exact_good_outputs(&good, d) as i64) < bound) as u64;
                cases += 1;
            }
        }
    }
    Ok(result("good-output-count", bad == 0, cases, format!("{bad} violations")))
}

/// Runs every check, in a fixed order.
pub fn verify_all(budget: &Budget) -> Result<Vec<CheckResult>> {
    let s = scale(budget);
    Ok(vec![
        poincare(s)?,
        fourier_and_sandwich(s)?,
        address()?,
        oi_b_dp()?,
        greedy(s, budget)?,
        address_extractor(budget)?,
        chain_rules(s)?,
        control_bits(s, budget)?,
        sliding_window(budget)?,
        xor_entropy(budget)?,
        survivors(s)?,
        protocol_extractor(budget)?,
        good_outputs()?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let r = verify_all(&Budget::small()).unwrap();
        let failed: Vec<_> = r.iter().filter(|c| !c.passed).collect();
        assert!(failed.is_empty(), "{failed:?}");
    }
}
