//! DC network data: a MATPOWER-subset case parser and the susceptance-weighted
//! Laplacian with its pseudo-inverse.

pub mod cases;
mod matpower;
pub mod network;
pub mod operators;

use thiserror::Error;

pub use matpower::parse_case;
pub use network::{Branch, Bus, Generator, Network, PolynomialCost};
pub use operators::{build_operators, DcOperators};

#[derive(Debug, Error)]
pub enum GridError {
    #[error("malformed case file: {0}")]
    Malformed(String),
    #[error("unsupported cost model {model} for generator {index} (only polynomial with at most 3 coefficients)")]
    UnknownCostModel { index: usize, model: i64 },
    #[error("network is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("branch {index} ({from}-{to}) has zero reactance")]
    ZeroReactance { index: usize, from: i64, to: i64 },
    #[error("invalid network: {0}")]
    Invalid(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GridError>;
