// SPDX-License-Identifier: Apache-2.0

//! Search-and-verify for ideal objects at tiny parameters.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{invalid, Error, Result};

use super::{
    verify_seeded_condenser, verify_seeded_extractor, verify_two_source_extractor, SeededCondenser,
    SeededExtractor, SeededMap, SeededWidths, TwoSourceExtractor, VerificationReport,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchSpec {
    SeededExt { widths: SeededWidths, k: u32, strong: bool, eps: f64 },
    SeededCond { widths: SeededWidths, k_in: u32, k_out: f64, eps: f64 },
    TwoSourceExt { n1: u32, n2: u32, m: u32, k1: u32, k2: u32, strong_first: bool, eps: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SearchedObject {
    SeededExt(SeededExtractor),
    SeededCond(SeededCondenser),
    TwoSourceExt(TwoSourceExtractor),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verified {
    pub object: SearchedObject,
    pub report: VerificationReport,
}

impl SearchSpec {
    fn candidate(&self, seed: u64, trial: u64) -> Result<SearchedObject> {
        Ok(match *self {
            SearchSpec::SeededExt { widths, strong, .. } => {
                SearchedObject::SeededExt(SeededExtractor { map: SeededMap::random(widths, seed, trial)?, strong })
            }
            SearchSpec::SeededCond { widths, .. } => {
                SearchedObject::SeededCond(SeededCondenser { map: SeededMap::random(widths, seed, trial)? })
            }
            SearchSpec::TwoSourceExt { n1, n2, m, strong_first, .. } => {
                let mut e = TwoSourceExtractor::random(n1, n2, m, seed, trial)?;
                e.strong_first = strong_first;
                SearchedObject::TwoSourceExt(e)
            }
        })
    }

    /// Verifies `object` against this spec's property.
    pub fn verify(&self, object: &SearchedObject, budget: &Budget) -> Result<VerificationReport> {
        match (self, object) {
            (SearchSpec::SeededExt { k, strong, eps, .. }, SearchedObject::SeededExt(e)) => {
                verify_seeded_extractor(e, *k, *strong, *eps, budget)
            }
            (SearchSpec::SeededCond { k_in, k_out, eps, .. }, SearchedObject::SeededCond(c)) => {
                verify_seeded_condenser(c, *k_in, *k_out, *eps, budget)
            }
            (SearchSpec::TwoSourceExt { k1, k2, eps, .. }, SearchedObject::TwoSourceExt(e)) => {
                verify_two_source_extractor(e, *k1, *k2, *eps, budget)
            }
            _ => Err(invalid("object", "kind does not match the search spec")),
        }
    }
}

/// Trials used when the caller does not say.
pub const DEFAULT_TRIES: u64 = 10_000;

/// How far a failing report is from passing; smaller is better.
fn shortfall(r: &VerificationReport) -> f64 {
    match r.property {
        super::Property::SeededCondenser { k_out, .. } => k_out - r.measured,
        _ => r.measured - r.eps,
    }
}

/// Draws random tables from `trial_rng(seed, t)` for `t = 0..tries` and
/// returns the first that verifies. Trials run in parallel batches; the
/// result is the lowest passing trial regardless of thread count.
pub fn search_object(spec: &SearchSpec, seed: u64, tries: u64, budget: &Budget) -> Result<Verified> {
    if tries == 0 {
        return Err(invalid("tries", "must be positive"));
    }
    let batch = (rayon::current_num_threads() as u64).max(1) * 2;
    let mut best: Option<(f64, Verified)> = None;
    let mut start = 0;
    while start < tries {
        let end = (start + batch).min(tries);
        let found: Vec<Result<Verified>> = (start..end)
            .into_par_iter()
            .map(|t| {
                let object = spec.candidate(seed, t)?;
                let report = spec.verify(&object, budget)?;
                Ok(Verified { object, report })
            })
            .collect();
        for v in found {
            let v = v?;
            if v.report.passed {
                return Ok(v);
            }
            let s = shortfall(&v.report);
            if best.as_ref().is_none_or(|(b, _)| s < *b) {
                best = Some((s, v));
            }
        }
        start = end;
    }
    let (_, best) = best.expect("tries > 0");
    Err(Error::NoPassingObject { tries, best_measured: best.report.measured, best: Box::new(best.report) })
}
