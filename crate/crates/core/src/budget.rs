// SPDX-License-Identifier: Apache-2.0

//! Resource ceilings for exhaustive computations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    /// Flat sources enumerated by an exhaustive verifier.
    pub flat_sources: u64,
    /// Total input bits `ell * n` handled by backward induction.
    pub dp_bits: u32,
    /// Deterministic strategies enumerated by brute force.
    pub strategies: u64,
    /// Largest `ell` accepted by the greedy coalition search.
    pub greedy_ell: u32,
    /// Work units (subsets times inputs) for worst-case smoothing.
    pub subset_work: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            flat_sources: 2_000_000,
            dp_bits: 22,
            strategies: 1 << 20,
            greedy_ell: 16,
            subset_work: 1 << 28,
        }
    }
}

impl Budget {
    pub fn small() -> Self {
        Budget {
            flat_sources: 200_000,
            dp_bits: 16,
            strategies: 1 << 14,
            greedy_ell: 12,
            subset_work: 1 << 22,
        }
    }

    pub fn large() -> Self {
        Budget {
            flat_sources: 50_000_000,
            dp_bits: 24,
            strategies: 1 << 26,
            greedy_ell: 20,
            subset_work: 1 << 32,
        }
    }

    /// Resolves a preset name: `small`, `default` or `large`.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "small" => Ok(Budget::small()),
            "default" => Ok(Budget::default()),
            "large" => Ok(Budget::large()),
            other => Err(Error::Unknown(other.to_string())),
        }
    }
}
