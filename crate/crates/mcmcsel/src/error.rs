//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by models, samplers, estimators and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point out of support: {0}")]
    OutOfSupport(String),

    #[error("target cannot be sampled directly: {0}")]
    NotDirectlySamplable(String),

    #[error("strategy/target configuration mismatch: {0}")]
    ConfigMismatch(String),

    #[error("proposal covariance is not positive definite: {0}")]
    DegenerateCovariance(String),

    #[error("k = {k} exceeds the {available} points available for the query")]
    KTooLarge { k: usize, available: usize },

    /// A k-th nearest-neighbor distance of exactly zero (tied points).
    #[error("zero k-th neighbor distance (duplicate points in sample)")]
    ZeroDistance,

    #[error("integral did not converge: {0}")]
    NonIntegrable(String),

    #[error("alpha = {0} outside the (1, inf) range covered by the geometric bound")]
    AlphaOutOfTheoremRange(f64),

    #[error("gamma argument not positive for k = {k}, alpha = {alpha}")]
    GammaPole { k: usize, alpha: f64 },

    /// The Renyi transform needs a positive mean estimate; small samples with
    /// alpha > 1 can produce a nonpositive one.
    #[error("nonpositive corrected mean estimate {0} (Renyi log undefined)")]
    NonPositiveM(f64),

    #[error("{n} points below the floor of {min} for the normal approximation")]
    TooFewPoints { n: usize, min: usize },

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable process exit code for the CLI. Codes partition error classes:
    /// 2 = user input, 3 = i/o, 4 = estimation/numerics, 5 = model/sampler.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Validation(_) => 2,
            Error::Io(_) => 3,
            Error::KTooLarge { .. }
            | Error::ZeroDistance
            | Error::NonIntegrable(_)
            | Error::AlphaOutOfTheoremRange(_)
            | Error::GammaPole { .. }
            | Error::NonPositiveM(_)
            | Error::TooFewPoints { .. } => 4,
            Error::DimensionMismatch { .. }
            | Error::OutOfSupport(_)
            | Error::NotDirectlySamplable(_)
            | Error::ConfigMismatch(_)
            | Error::DegenerateCovariance(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
