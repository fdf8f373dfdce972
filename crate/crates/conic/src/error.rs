use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConicError {
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("objective is not convex (quadratic form has a negative eigenvalue)")]
    NotConvex,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("covariance matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("covariance could not be factored even after ridging")]
    FactorFailed,
    #[error("KKT system is singular")]
    SingularKkt,
    #[error(transparent)]
    Core(#[from] wdrcc_core::Error),
}

pub type Result<T> = std::result::Result<T, ConicError>;
