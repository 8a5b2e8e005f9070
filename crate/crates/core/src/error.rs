// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("width mismatch: expected {expected}, found {found}")]
    WidthMismatch { expected: u32, found: u32 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("all-zero probability vector")]
    EmptyDistribution,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("budget exceeded for {what}: need {needed}, limit {limit}")]
    BudgetExceeded {
        what: String,
        needed: String,
        limit: String,
    },

    #[error("adversary wrote {value} into block {block}, which is only {width} bits wide")]
    AdversaryOutOfWidth { block: usize, value: u64, width: u32 },

    #[error("no object passed verification after {tries} tries (best measured {best_measured})")]
    NoPassingObject {
        tries: u64,
        best_measured: f64,
        best: Box<crate::prims::VerificationReport>,
    },

    #[error("infeasible parameters, violated: {}", .0.join(", "))]
    Infeasible(Vec<String>),

    #[error("unknown identifier `{0}`")]
    Unknown(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}

pub(crate) fn over_budget(what: &str, needed: impl ToString, limit: impl ToString) -> Error {
    Error::BudgetExceeded {
        what: what.to_string(),
        needed: needed.to_string(),
        limit: limit.to_string(),
    }
}
