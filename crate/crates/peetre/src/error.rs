//! Shared error type for every computation in this crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty {0}")]
    Empty(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("exponents q={q}, p={p} outside the convex range (both must be >= 1)")]
    NonConvexExponents { q: f64, p: f64 },

    #[error("solver does not apply: {0}")]
    SolverMismatch(String),

    #[error("unsupported space pair for exact ball minimization: ({x}, {y})")]
    UnsupportedBallPair { x: &'static str, y: &'static str },

    #[error("no contraction at t0: K = {k_value} >= threshold {threshold}")]
    NoContraction { k_value: f64, threshold: f64 },

    #[error("grid too coarse: spacing {spacing} exceeds required {required}")]
    GridTooCoarse { spacing: f64, required: f64 },

    #[error("certificate check failed: {0}")]
    CertificateViolation(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("solver did not converge: {0}")]
    SolverFailure(String),
}

impl Error {
    /// Convenience constructor for parameter validation failures.
    pub fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
