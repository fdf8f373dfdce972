use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(f64),
    #[error("probability {0} outside the open interval (0, 1)")]
    ProbabilityOutOfRange(f64),
    #[error("invalid risk specification: {0}")]
    InvalidRiskSpec(String),
    #[error("invalid tolerances: {0}")]
    InvalidTolerances(String),
    #[error("no root: {0}")]
    NoRoot(String),
    #[error("could not bracket root below ceiling {ceiling}")]
    BracketFailure { ceiling: f64 },
    #[error("root finder did not converge after {iterations} iterations")]
    RootNotConverged { iterations: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("point ({ell}, {u}) is off the level set (residual {residual:e})")]
    OffLevelSet { ell: f64, u: f64, residual: f64 },
    #[error("invalid polyline: {0}")]
    InvalidPolyline(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
