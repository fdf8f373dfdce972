//! Batch front end: level-set traces, approximation-bound tables, robust
//! dispatch and out-of-sample studies, each written as CSV/JSON with a run
//! manifest.

pub mod apxbd;
pub mod commands;
pub mod error;
pub mod manifest;
pub mod study;
pub mod trace;

pub use error::{status_exit_code, CliError, Result};
pub use manifest::{RunManifest, Table};
pub use study::{Formulation, Study, StudyConfig};
