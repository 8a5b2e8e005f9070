// SPDX-License-Identifier: Apache-2.0

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    for_each_good_assignment, BlockFunction, GoodBlockModel, GoodPrefixAdversary,
    SourceSpec, TableAdversary,
};
use crate::boolfn::BooleanFunction;
use crate::budget::Budget;
use crate::dist::mask;
use crate::error::{invalid, over_budget, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Max,
    Min,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameValue {
    pub value: f64,
    pub strategy: TableAdversary,
}

const PAR_CHUNK: usize = 1 << 14;

/// Backward induction over blocks `ell, ell-1, .., 1`. `values` is indexed
/// by the packed source. Bad blocks take the max (min) over their `2^n`
/// values, ties to the smallest value; good blocks average over their
/// support.
fn backward(
    mut cur: Vec<f64>,
    spec: &SourceSpec,
    supports: &[Option<Vec<u64>>],
    dir: Direction,
    record: bool,
) -> (f64, TableAdversary) {
    let n = spec.n as usize;
    let mut strategy = TableAdversary::new(spec.n);
    for j in (1..=spec.ell).rev() {
        let chunk = 1usize << (n * (j - 1));
        let next: Vec<f64> = match &supports[j - 1] {
            Some(s) => {
                let avg = |p: usize| s.iter().map(|&v| cur[v as usize * chunk + p]).sum::<f64>() / s.len() as f64;
                if chunk >= PAR_CHUNK {
                    (0..chunk).into_par_iter().map(avg).collect()
                } else {
                    (0..chunk).map(avg).collect()
                }
            }
            None => {
                let best = |p: usize| {
                    let mut b = (0u64, cur[p]);
                    for v in 1..1usize << n {
                        let x = cur[v * chunk + p];
                        let better = match dir {
                            Direction::Max => x > b.1,
                            Direction::Min => x < b.1,
                        };
                        if better {
                            b = (v as u64, x);
                        }
                    }
                    b
                };
                let pairs: Vec<(u64, f64)> = if chunk >= PAR_CHUNK {
                    (0..chunk).into_par_iter().map(best).collect()
                } else {
                    (0..chunk).map(best).collect()
                };
                if record {
                    strategy.tables.insert(j, pairs.iter().map(|p| p.0).collect());
                }
                pairs.into_iter().map(|p| p.1).collect()
            }
        };
        cur = next;
    }
    (cur[0], strategy)
}

/// Value of the online game with payoff `values` (indexed by packed
/// source) and an optimal deterministic strategy.
pub fn solve_game(
    values: Vec<f64>,
    spec: &SourceSpec,
    goods: &GoodBlockModel,
    dir: Direction,
    budget: &Budget,
) -> Result<GameValue> {
    spec.check_dp_bits(budget)?;
    if values.len() != 1usize << spec.total_bits() {
        return Err(invalid("values", format!("{} entries for {} bits", values.len(), spec.total_bits())));
    }
    let supports = goods.supports(spec)?;
    let (value, strategy) = backward(values, spec, &supports, dir, true);
    Ok(GameValue { value, strategy })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnlineBiasReport {
    /// `E f(U)` over all `ell * n` bits.
    pub uniform_e: f64,
    pub max_e: f64,
    pub min_e: f64,
    /// `max(max_e - uniform_e, uniform_e - min_e)`.
    pub oi_b: f64,
    pub max_strategy: TableAdversary,
    pub min_strategy: TableAdversary,
}

fn indicator_values(f: &BooleanFunction) -> Vec<f64> {
    (0..f.size() as u64).map(|x| f.get(x) as u8 as f64).collect()
}

/// Exact largest and smallest `E f(X)` over online adversaries on the bad
/// blocks of `spec`.
pub fn optimal_online_bias(
    f: &BooleanFunction,
    spec: &SourceSpec,
    goods: &GoodBlockModel,
    budget: &Budget,
) -> Result<OnlineBiasReport> {
    if f.ell() != spec.total_bits() {
        return Err(Error::WidthMismatch { expected: spec.total_bits(), found: f.ell() });
    }
    let hi = solve_game(indicator_values(f), spec, goods, Direction::Max, budget)?;
    let lo = solve_game(indicator_values(f), spec, goods, Direction::Min, budget)?;
    let uniform_e = f.expectation();
    Ok(OnlineBiasReport {
        uniform_e,
        max_e: hi.value,
        min_e: lo.value,
        oi_b: (hi.value - uniform_e).max(uniform_e - lo.value),
        max_strategy: hi.strategy,
        min_strategy: lo.strategy,
    })
}

/// Every deterministic strategy that reads only good blocks (bad blocks
/// are themselves functions of the good ones, so nothing is lost).
pub struct StrategySpace {
    spec: SourceSpec,
    supports: Vec<Option<Vec<u64>>>,
    sizes: Vec<(usize, usize)>,
    entries: usize,
}

impl StrategySpace {
    pub fn new(spec: &SourceSpec, goods: &GoodBlockModel, budget: &Budget) -> Result<Self> {
        let supports = goods.supports(spec)?;
        let sizes: Vec<(usize, usize)> = GoodPrefixAdversary::table_sizes(&supports).into_iter().collect();
        let entries: usize = sizes.iter().map(|s| s.1).sum();
        let bits = entries as f64 * spec.n as f64;
        if bits > 63.0 || (1u64 << bits as u32) > budget.strategies {
            return Err(over_budget("strategies", format!("2^{bits}"), budget.strategies));
        }
        Ok(StrategySpace { spec: spec.clone(), supports, sizes, entries })
    }

    pub fn count(&self) -> u64 {
        1u64 << (self.entries as u32 * self.spec.n)
    }

    /// Strategy number `s`: table entries read `n` bits at a time from `s`.
    pub fn strategy(&self, s: u64) -> GoodPrefixAdversary {
        let n = self.spec.n;
        let mut shift = 0u32;
        let tables = self
            .sizes
            .iter()
            .map(|&(j, size)| {
                let t = (0..size)
                    .map(|_| {
                        let v = (s >> shift) & mask(n);
                        shift += n;
                        v
                    })
                    .collect();
                (j, t)
            })
            .collect();
        GoodPrefixAdversary { supports: self.supports.clone(), tables }
    }

    pub fn supports(&self) -> &[Option<Vec<u64>>] {
        &self.supports
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BruteForceReport {
    pub uniform_e: f64,
    pub max_e: f64,
    pub min_e: f64,
    pub oi_b: f64,
    pub strategies: u64,
}

/// `oI_B` by enumerating every deterministic table strategy and
/// evaluating each one exactly.
pub fn brute_force_oi_b(
    f: &BooleanFunction,
    spec: &SourceSpec,
    goods: &GoodBlockModel,
    budget: &Budget,
) -> Result<BruteForceReport> {
    if f.ell() != spec.total_bits() {
        return Err(Error::WidthMismatch { expected: spec.total_bits(), found: f.ell() });
    }
    let space = StrategySpace::new(spec, goods, budget)?;
    let values: Vec<f64> = (0..space.count())
        .into_par_iter()
        .map(|s| {
            let adv = space.strategy(s);
            let mut e = 0.0;
            for_each_good_assignment(spec, space.supports(), |w, vals| {
                let blocks = super::complete_source(spec, &adv, vals)?;
                if f.get(super::pack_blocks(&blocks, spec.n)) {
                    e += w;
                }
                Ok(())
            })?;
            Ok(e)
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_e = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_e = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let uniform_e = f.expectation();
    Ok(BruteForceReport {
        uniform_e,
        max_e,
        min_e,
        oi_b: (max_e - uniform_e).max(uniform_e - min_e),
        strategies: space.count(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointMassReport {
    pub value: u64,
    pub p_max: f64,
    pub min_entropy: f64,
    pub strategy: TableAdversary,
}

/// Largest probability any single output can be forced to, maximised
/// separately for each output value.
pub fn worst_case_point_mass(
    cond: &BlockFunction,
    spec: &SourceSpec,
    goods: &GoodBlockModel,
    budget: &Budget,
) -> Result<PointMassReport> {
    cond.check_spec(spec)?;
    spec.check_dp_bits(budget)?;
    let work = (1u64 << cond.m) << spec.total_bits();
    if work > budget.subset_work {
        return Err(over_budget("point-mass work", work, budget.subset_work));
    }
    let supports = goods.supports(spec)?;
    let best = (0..1u64 << cond.m)
        .into_par_iter()
        .map(|z| {
            let vals = cond.table().iter().map(|&y| (y as u64 == z) as u8 as f64).collect();
            (z, backward(vals, spec, &supports, Direction::Max, false).0)
        })
        .reduce(|| (u64::MAX, f64::NEG_INFINITY), |a, b| {
            if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                b
            } else {
                a
            }
        });
    let vals = cond.table().iter().map(|&y| (y as u64 == best.0) as u8 as f64).collect();
    let (p_max, strategy) = backward(vals, spec, &supports, Direction::Max, true);
    Ok(PointMassReport { value: best.0, p_max, min_entropy: -p_max.log2(), strategy })
}

/// `D_S = max_A Pr[cond(X_A) in S]` for every output set `S`, indexed by
/// the bitmask of `S`.
pub fn subset_masses(
    cond: &BlockFunction,
    spec: &SourceSpec,
    goods: &GoodBlockModel,
    budget: &Budget,
) -> Result<Vec<f64>> {
    cond.check_spec(spec)?;
    spec.check_dp_bits(budget)?;
    if cond.m > 5 {
        return Err(over_budget("output bits for subset enumeration", cond.m, 5));
    }
    let sets = 1u64 << (1u32 << cond.m);
    let work = (sets as u128) << spec.total_bits();
    if work > budget.subset_work as u128 {
        return Err(over_budget("subset work", work, budget.subset_work));
    }
    let supports = goods.supports(spec)?;
    Ok((0..sets)
        .into_par_iter()
        .map(|s| {
            if s == 0 {
                return 0.0;
            }
            let vals = cond.table().iter().map(|&y| ((s >> y) & 1) as f64).collect();
            backward(vals, spec, &supports, Direction::Max, false).0
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothWorstCase {
    pub eps: f64,
    /// `min_A H_inf^eps(cond(X_A))`.
    pub value: f64,
    pub cap: f64,
    /// Output set whose forced mass determines the cap, empty when the
    /// cap is the uniform floor.
    pub binding_set: Vec<u64>,
    pub binding_mass: f64,
}

/// Exact worst case over online adversaries of the smooth min-entropy of
/// the output.
///
/// `H_inf^eps(Z) >= t` iff `Pr[Z in S] - |S| 2^-t <= eps` for every `S`,
/// and each `max_A Pr[Z_A in S]` is a backward induction, so the worst
/// cap is `max(2^-m, max_S (D_S - eps) / |S|)`.
pub fn worst_case_smooth_min_entropy(
    cond: &BlockFunction,
    spec: &SourceSpec,
    goods: &GoodBlockModel,
    eps: f64,
    budget: &Budget,
) -> Result<SmoothWorstCase> {
    if !(0.0..1.0).contains(&eps) {
        return Err(invalid("eps", format!("{eps} outside [0, 1)")));
    }
    let masses = subset_masses(cond, spec, goods, budget)?;
    Ok(smooth_from_masses(&masses, cond.m, eps))
}

/// Worst-case smoothing from precomputed `subset_masses`.
pub fn smooth_from_masses(masses: &[f64], m: u32, eps: f64) -> SmoothWorstCase {
    let mut cap = 1.0 / (1u64 << m) as f64;
    let mut binding = 0u64;
    for (s, &d) in masses.iter().enumerate().skip(1) {
        let c = (d - eps) / (s as u64).count_ones() as f64;
        if c > cap {
            cap = c;
            binding = s as u64;
        }
    }
    SmoothWorstCase {
        eps,
        value: -cap.log2(),
        cap,
        binding_set: (0..1u64 << m).filter(|z| (binding >> z) & 1 == 1).collect(),
        binding_mass: masses[binding as usize],
    }
}

/// Worst-case distance from uniform from precomputed `subset_masses`.
pub fn distance_from_masses(masses: &[f64], m: u32) -> f64 {
    let unit = 1.0 / (1u64 << m) as f64;
    masses
        .iter()
        .enumerate()
        .map(|(s, &d)| d - (s as u64).count_ones() as f64 * unit)
        .fold(0.0, f64::max)
}

/// `max_A |cond(X_A) - U_m|`, exact.
pub fn worst_case_distance(
    cond: &BlockFunction,
    spec: &SourceSpec,
    goods: &GoodBlockModel,
    budget: &Budget,
) -> Result<f64> {
    let masses = subset_masses(cond, spec, goods, budget)?;
    Ok(distance_from_masses(&masses, cond.m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::{make_named_function, NamedFunction};
    use crate::sources::exact_expectation;

    fn maj3() -> BooleanFunction {
        make_named_function(&NamedFunction::Majority, 3).unwrap()
    }

    #[test]
    fn majority_examples() {
        let b = Budget::default();
        let spec = SourceSpec::new(3, 1, 1, [3]).unwrap();
        let r = optimal_online_bias(&maj3(), &spec, &GoodBlockModel::Uniform, &b).unwrap();
        assert_eq!((r.max_e, r.min_e, r.oi_b), (0.75, 0.25, 0.25));
        let spec = SourceSpec::new(3, 1, 1, [2, 3]).unwrap();
        let r = optimal_online_bias(&maj3(), &spec, &GoodBlockModel::Uniform, &b).unwrap();
        assert_eq!((r.max_e, r.oi_b), (1.0, 0.5));
    }

    #[test]
    fn parity_last_block() {
        let f = make_named_function(&NamedFunction::Parity, 4).unwrap();
        let spec = SourceSpec::new(4, 1, 1, [4]).unwrap();
        let r = optimal_online_bias(&f, &spec, &GoodBlockModel::Uniform, &Budget::default()).unwrap();
        assert_eq!(r.oi_b, 0.5);
        let spec = SourceSpec::new(4, 1, 1, [2]).unwrap();
        let r = optimal_online_bias(&f, &spec, &GoodBlockModel::Uniform, &Budget::default()).unwrap();
        assert_eq!(r.oi_b, 0.0);
    }

    #[test]
    fn dictator_brute_force() {
        let f = make_named_function(&NamedFunction::Dictator { index: 1 }, 2).unwrap();
        let spec = SourceSpec::new(2, 1, 1, [1]).unwrap();
        let r = brute_force_oi_b(&f, &spec, &GoodBlockModel::Uniform, &Budget::default()).unwrap();
        assert_eq!(r.oi_b, 0.5);
        assert_eq!(r.strategies, 2);
    }

    #[test]
    fn strategy_replays_to_value() {
        let f = BooleanFunction::random(6, 11).unwrap();
        let spec = SourceSpec::new(3, 2, 2, [2]).unwrap();
        let b = Budget::default();
        let r = optimal_online_bias(&f, &spec, &GoodBlockModel::Uniform, &b).unwrap();
        let e = exact_expectation(&f, &spec, &GoodBlockModel::Uniform, &r.max_strategy, &b).unwrap();
        assert!((e - r.max_e).abs() < 1e-12);
    }

    #[test]
    fn xor_point_mass() {
        let cond = BlockFunction::from_fn(2, 1, 1, |b| b[0] ^ b[1]).unwrap();
        let spec = SourceSpec::new(2, 1, 1, [1]).unwrap();
        let r = worst_case_point_mass(&cond, &spec, &GoodBlockModel::Uniform, &Budget::default()).unwrap();
        assert_eq!(r.p_max, 0.5);
        let spec = SourceSpec::new(2, 1, 1, [2]).unwrap();
        let r = worst_case_point_mass(&cond, &spec, &GoodBlockModel::Uniform, &Budget::default()).unwrap();
        assert_eq!(r.p_max, 1.0);
    }

    #[test]
    fn smooth_worst_case_of_copied_block() {
        // Output (x1, x2) with block 2 bad: any adversary leaves two atoms of
        // mass 1/2, and capping them at 3/8 costs exactly 1/4.
        let cond = BlockFunction::from_fn(2, 1, 2, |b| b[0] | (b[1] << 1)).unwrap();
        let spec = SourceSpec::new(2, 1, 1, [2]).unwrap();
        let b = Budget::default();
        let r = worst_case_smooth_min_entropy(&cond, &spec, &GoodBlockModel::Uniform, 0.25, &b).unwrap();
        assert_eq!(r.value, -(0.375f64).log2());
        assert_eq!(r.binding_set.len(), 2);
        let r = worst_case_smooth_min_entropy(&cond, &spec, &GoodBlockModel::Uniform, 0.0, &b).unwrap();
        assert_eq!(r.value, 1.0);
        let d = worst_case_distance(&cond, &spec, &GoodBlockModel::Uniform, &b).unwrap();
        assert_eq!(d, 0.5);
    }

    #[test]
    fn budget_is_enforced() {
        let f = BooleanFunction::random(12, 1).unwrap();
        let spec = SourceSpec::new(12, 1, 1, [12]).unwrap();
        let tiny = Budget { dp_bits: 10, ..Budget::default() };
        assert!(matches!(
            optimal_online_bias(&f, &spec, &GoodBlockModel::Uniform, &tiny),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
