use thiserror::Error;

#[derive(Debug, Error)]
pub enum OpfError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("wind fleet: {0}")]
    Fleet(String),
    #[error("need at least 2 samples to estimate moments, got {0}")]
    TooFewSamples(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("generator {index} has pmin {pmin} > pmax {pmax}")]
    InvertedLimits { index: usize, pmin: f64, pmax: f64 },
    #[error("slack bus {0} not found")]
    MissingSlack(i64),
    #[error(transparent)]
    Core(#[from] wdrcc_core::Error),
    #[error(transparent)]
    Conic(#[from] wdrcc_conic::ConicError),
    #[error(transparent)]
    Grid(#[from] wdrcc_grid::GridError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, OpfError>;
