// SPDX-License-Identifier: Apache-2.0

//! Greedy coalition attacks on Boolean functions fed by an online
//! adversary, one input bit per block.

use serde::{Deserialize, Serialize};

use crate::boolfn::{online_influences, variance_ef, BooleanFunction};
use crate::budget::Budget;
use crate::error::{invalid, over_budget, Error, Result};
use crate::sources::{
    exact_expectation, optimal_online_bias, GoodBlockModel, OnlineAdversary, SourceSpec,
    TableAdversary,
};

const SLACK: f64 = 1e-12;

/// One greedy step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyStep {
    pub coordinate: usize,
    /// `oI_i` of the function restricted by the current coalition.
    pub score: f64,
    /// `Var((-1)^{f_t})` before the step.
    pub variance: f64,
    pub gain: f64,
    pub expectation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoalitionCertificate {
    pub ell: u32,
    pub alpha: f64,
    pub beta: f64,
    /// Coordinates in selection order.
    pub coalition: Vec<usize>,
    pub steps: Vec<GreedyStep>,
    pub achieved_expectation: f64,
    /// `ell (beta - alpha) / (4 alpha (1 - beta))`.
    pub stated_size_bound: f64,
    /// `ceil(ell (beta - alpha) / (2 alpha (1 - beta)))`, which follows from
    /// a per-step gain of at least half the chosen online influence.
    pub proven_size_bound: f64,
    pub strategy: TableAdversary,
}

/// `f` with the coordinates in `strategy` overwritten online.
fn restrict(f: &BooleanFunction, coalition: &[usize], strategy: &TableAdversary) -> Result<BooleanFunction> {
    let mut sorted = coalition.to_vec();
    sorted.sort_unstable();
    BooleanFunction::from_fn(f.ell(), |x| {
        let mut y = x;
        for &j in &sorted {
            let prefix = y & ((1u64 << (j - 1)) - 1);
            let bit = strategy.tables[&j][prefix as usize];
            y = (y & !(1u64 << (j - 1))) | (bit << (j - 1));
        }
        f.get(y)
    })
}

/// Greedily adds the uncontrolled coordinate of largest online influence
/// of the currently restricted function until the adversary can push
/// `E f` to `beta`.
pub fn greedy_coalition(f: &BooleanFunction, beta: f64, budget: &Budget) -> Result<CoalitionCertificate> {
    let ell = f.ell();
    if ell == 0 {
        return Err(invalid("ell", "must be positive"));
    }
    if ell > budget.greedy_ell {
        return Err(over_budget("greedy ell", ell, budget.greedy_ell));
    }
    let alpha = f.expectation();
    if !(beta > alpha && beta <= 1.0) {
        return Err(invalid("beta", format!("{beta} must lie in (E f = {alpha}, 1]")));
    }
    if alpha == 0.0 {
        return Err(Error::Infeasible(vec!["E f > 0".into()]));
    }
    let per_step = 2.0 * alpha * (1.0 - beta) / ell as f64;
    let ratio = ell as f64 * (beta - alpha) / (alpha * (1.0 - beta));
    let mut coalition: Vec<usize> = Vec::new();
    let mut steps = Vec::new();
    let mut value = alpha;
    let mut strategy = TableAdversary::new(1);
    while value < beta - SLACK {
        let restricted = restrict(f, &coalition, &strategy)?;
        let scores = online_influences(&restricted);
        let variance = variance_ef(&restricted);
        let (coordinate, score) = (1..=ell as usize)
            .filter(|i| !coalition.contains(i))
            .map(|i| (i, scores[i - 1]))
            .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        if coordinate == 0 {
            return Err(Error::Infeasible(vec![format!("E f >= {beta} with full control")]));
        }
        coalition.push(coordinate);
        let spec = SourceSpec::new(ell as usize, 1, 1, coalition.iter().cloned())?;
        let report = optimal_online_bias(f, &spec, &GoodBlockModel::Uniform, budget)?;
        let gain = report.max_e - value;
        // The restricted function has some coordinate of online influence
        // at least Var/ell, and controlling it gains half of that.
        assert!(score >= variance / ell as f64 - SLACK, "online influence below Var/ell");
        assert!(gain >= score / 2.0 - SLACK, "gain below half the online influence");
        assert!(value >= beta || gain >= per_step - SLACK, "gain below 2 alpha (1 - beta) / ell");
        value = report.max_e;
        strategy = report.max_strategy;
        steps.push(GreedyStep { coordinate, score, variance, gain, expectation: value });
    }
    Ok(CoalitionCertificate {
        ell,
        alpha,
        beta,
        coalition,
        steps,
        achieved_expectation: value,
        stated_size_bound: ratio / 4.0,
        proven_size_bound: (ratio / 2.0).ceil(),
        strategy,
    })
}

/// Exact `E f` when the certificate's strategy drives its coalition.
pub fn replay_certificate(f: &BooleanFunction, cert: &CoalitionCertificate, budget: &Budget) -> Result<f64> {
    let spec = SourceSpec::new(f.ell() as usize, 1, 1, cert.coalition.iter().cloned())?;
    let adv: &dyn OnlineAdversary = &cert.strategy;
    exact_expectation(f, &spec, &GoodBlockModel::Uniform, adv, budget)
}

/// Largest `E f` guaranteed reachable with `b` controlled coordinates:
/// `alpha (ell + 4b) / (ell + 4 alpha b)`.
pub fn bias_budget_bound(alpha: f64, ell: u32, b: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(invalid("alpha", format!("{alpha} outside [0, 1]")));
    }
    if ell == 0 || b > ell {
        return Err(invalid("b", format!("need 0 <= b <= ell, got b={b}, ell={ell}")));
    }
    let (l, b) = (ell as f64, b as f64);
    Ok(alpha * (l + 4.0 * b) / (l + 4.0 * alpha * b))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImpossibilityCertificate {
    pub eps: f64,
    /// `ell eps / (1 - 2 eps)`.
    pub size_bound: f64,
    pub bias: f64,
    pub certificate: CoalitionCertificate,
}

/// For balanced `f` and `0 < eps < 1/3`, exhibits a small coalition that
/// moves `f(X)` at least `eps` away from a uniform bit.
pub fn extraction_impossibility(f: &BooleanFunction, eps: f64, budget: &Budget) -> Result<ImpossibilityCertificate> {
    if !(eps > 0.0 && eps < 1.0 / 3.0) {
        return Err(invalid("eps", format!("{eps} outside (0, 1/3)")));
    }
    if !f.is_balanced() {
        return Err(invalid("f", "must be balanced"));
    }
    let certificate = greedy_coalition(f, 0.5 + eps, budget)?;
    Ok(ImpossibilityCertificate {
        eps,
        size_bound: f.ell() as f64 * eps / (1.0 - 2.0 * eps),
        bias: certificate.achieved_expectation - 0.5,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::{make_named_function, NamedFunction};

    fn named(kind: NamedFunction, ell: u32) -> BooleanFunction {
        make_named_function(&kind, ell).unwrap()
    }

    #[test]
    fn majority_three() {
        let f = named(NamedFunction::Majority, 3);
        let c = greedy_coalition(&f, 0.75, &Budget::default()).unwrap();
        assert_eq!(c.coalition, vec![1]);
        assert_eq!(c.achieved_expectation, 0.75);
        let imp = extraction_impossibility(&f, 0.2, &Budget::default()).unwrap();
        assert_eq!(imp.certificate.coalition.len(), 1);
        assert_eq!(imp.bias, 0.25);
    }

    #[test]
    fn parity_picks_last() {
        let f = named(NamedFunction::Parity, 4);
        let c = greedy_coalition(&f, 1.0, &Budget::default()).unwrap();
        assert_eq!(c.coalition, vec![4]);
        let imp = extraction_impossibility(&f, 0.3, &Budget::default()).unwrap();
        assert_eq!(imp.certificate.coalition, vec![4]);
    }

    #[test]
    fn address_two() {
        let f = named(NamedFunction::Address, 6);
        let imp = extraction_impossibility(&f, 0.1, &Budget::default()).unwrap();
        assert_eq!(imp.certificate.coalition, vec![3]);
        assert_eq!(imp.bias, 0.125);
    }

    #[test]
    fn budget_formula() {
        assert!((bias_budget_bound(0.5, 100, 25).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((bias_budget_bound(0.5, 100, 100).unwrap() - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(bias_budget_bound(0.3, 10, 0).unwrap(), 0.3);
        assert!(bias_budget_bound(0.5, 10, 11).is_err());
    }

    #[test]
    fn preconditions() {
        let f = named(NamedFunction::Majority, 3);
        assert!(greedy_coalition(&f, 0.5, &Budget::default()).is_err());
        assert!(extraction_impossibility(&f, 1.0 / 3.0, &Budget::default()).is_err());
        let g = named(NamedFunction::Constant { value: true }, 3);
        assert!(extraction_impossibility(&g, 0.1, &Budget::default()).is_err());
    }

    #[test]
    fn replay_matches() {
        let f = BooleanFunction::random(8, 4).unwrap();
        let beta = (f.expectation() + 0.2).min(1.0);
        let c = greedy_coalition(&f, beta, &Budget::default()).unwrap();
        let e = replay_certificate(&f, &c, &Budget::default()).unwrap();
        assert!((e - c.achieved_expectation).abs() < 1e-9);
    }
}
