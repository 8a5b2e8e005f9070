// SPDX-License-Identifier: Apache-2.0

//! Analysis toolkit for online adversarial block sources.
//!
//! A source is a sequence of `ell` blocks of `n` bits. Good blocks are
//! independent and carry min-entropy; bad blocks are written by an
//! adversary that sees only earlier blocks. The crate computes exact
//! adversary values by backward induction, evaluates extractors and
//! condensers against such sources, and simulates the leader-election
//! protocols that motivate them.

pub mod attacks;
pub mod boolfn;
pub mod budget;
pub mod dist;
pub mod error;
pub mod gf2;
pub mod joint;
pub mod pipelines;
pub mod prims;
pub mod protocols;
pub mod sources;
pub mod suite;

pub use budget::Budget;
pub use error::{Error, Result};

/// Derives a per-trial RNG from a run seed.
pub fn trial_rng(seed: u64, trial: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}
