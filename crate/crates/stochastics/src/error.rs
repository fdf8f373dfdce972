use thiserror::Error;

#[derive(Debug, Error)]
pub enum StochasticsError {
    #[error("invalid truth model: {0}")]
    InvalidModel(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("malformed sample file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Opf(#[from] wdrcc_opf::OpfError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, StochasticsError>;
