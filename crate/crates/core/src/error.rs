use thiserror::Error;

/// Errors raised by dictionary construction, the solvers and the experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("matrix is not Hermitian positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("{what} would hold {requested} entries, above the ceiling of {limit}")]
    TooLarge {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("selected columns are rank deficient")]
    RankDeficient,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("could not draw {k} frequencies with spacing {spacing} after {attempts} attempts")]
    SpacingInfeasible {
        k: usize,
        spacing: f64,
        attempts: usize,
    },

    #[error("no band count in [4, 100] reaches ratio {threshold} for N = {n}")]
    NoFeasibleBandCount { n: usize, threshold: f64 },

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
