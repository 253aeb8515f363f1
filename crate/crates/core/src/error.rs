use std::io;

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two sequences that must have equal length do not.
    #[error("length mismatch: {what} has length {got}, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    /// A perturbed run-length weight went negative before normalization.
    #[error("negative probability mass at run length {l} (weight {weight})")]
    NegativeMass { l: usize, weight: f64 },

    /// Not enough runs (or super-runs) to form a statistic.
    #[error("too few {what}: found {found}, need at least {needed}")]
    TooFew {
        what: &'static str,
        found: usize,
        needed: usize,
    },

    /// Exhaustive enumeration refused because the block is too long.
    #[error("block length {n} exceeds the exhaustive-enumeration limit {max}; use Monte Carlo estimation instead")]
    TooLarge { n: usize, max: usize },

    /// The source kind is not supported by the requested estimator.
    #[error("unsupported source: {0}")]
    UnsupportedSource(String),

    /// The simulation budget is too small for a trustworthy plug-in estimate.
    #[error("underpowered: {0}")]
    Underpowered(String),

    /// Malformed input data.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(domain(format!("{name} = {p} is not a probability")))
    }
}
