use thiserror::Error;
use wdrcc_conic::{KktResiduals, Status};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("solver finished with status {status:?} (residuals {residuals:?})")]
    NotOptimal { status: Status, residuals: KktResiduals },
    #[error(transparent)]
    Core(#[from] wdrcc_core::Error),
    #[error(transparent)]
    Conic(#[from] wdrcc_conic::ConicError),
    #[error(transparent)]
    Grid(#[from] wdrcc_grid::GridError),
    #[error(transparent)]
    Opf(#[from] wdrcc_opf::OpfError),
    #[error(transparent)]
    Stochastics(#[from] wdrcc_stochastics::StochasticsError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// 2 for an infeasible (or unbounded) model, 3 when the solver stalls,
    /// 1 for every input or I/O problem.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::NotOptimal { status, .. } => status_exit_code(*status),
            _ => 1,
        }
    }
}

pub fn status_exit_code(status: Status) -> i32 {
    match status {
        Status::Optimal => 0,
        Status::Infeasible | Status::Unbounded => 2,
        Status::MaxIter => 3,
    }
}
