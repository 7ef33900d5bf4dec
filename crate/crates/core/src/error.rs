use thiserror::Error;

/// Errors produced by kernel, statistic, test and sampler routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("kernel bandwidth has not been resolved (median heuristic sentinel)")]
    UnresolvedBandwidth,

    #[error("kernel bandwidth must be finite and positive, got {0}")]
    InvalidBandwidth(f64),

    #[error("all points are identical; median heuristic is undefined")]
    AllPointsIdentical,

    #[error("need at least {needed} points, got {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("support points {first} and {second} coincide")]
    DuplicateSupportPoint { first: usize, second: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid kernel specification `{0}`")]
    InvalidKernelSpec(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
