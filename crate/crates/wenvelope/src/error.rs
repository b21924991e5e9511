//! Error types shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

use crate::envelope::EnvelopeFit;

#[derive(Debug, Error)]
pub enum Error {
    /// Input data too small or empty for the requested operation.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// The design matrix X'X is numerically singular.
    #[error("rank-deficient design: condition number of X'X is {condition:.6e}")]
    RankDeficient { condition: f64 },

    /// A covariance matrix failed the positive-definiteness threshold
    /// (smallest eigenvalue must exceed 1e-10 times the largest).
    #[error("degenerate covariance: {0}")]
    DegenerateCovariance(String),

    /// An argument violated a documented precondition.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// Matrix or vector shapes do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The subspace optimizer exhausted its sweep budget. The best fit
    /// found so far and the projected gradient norm are attached.
    #[error(
        "envelope fit at dimension {} did not converge within {sweeps} sweeps \
         (projected gradient norm {grad_norm:.3e})",
        best.j
    )]
    NonConvergence {
        best: Box<EnvelopeFit>,
        sweeps: usize,
        grad_norm: f64,
    },

    /// A standard error in a ratio denominator is exactly zero.
    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    /// Too many bootstrap replicates failed to fit.
    #[error("{failed} of {total} bootstrap replicates failed (limit {limit:.0}%): {detail}")]
    TooManyFailures {
        failed: usize,
        total: usize,
        limit: f64,
        detail: String,
    },

    /// Paired statistics requested from bootstrap runs that did not share
    /// residual streams.
    #[error("unpaired bootstrap results: {0}")]
    UnpairedResults(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    /// Malformed input file (missing column, bad cell, empty body, ...).
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
