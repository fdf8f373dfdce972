//! Forecast-error sampling from known truth laws and out-of-sample
//! evaluation of fixed dispatches.

pub mod error;
pub mod io;
pub mod oos;
pub mod summary;
pub mod truth;

pub use error::{Result, StochasticsError};
pub use oos::{oos_violation, OosEvaluator, OosMode, FEASIBILITY_TOL_MW};
pub use summary::{binomial_std_error, summarize, Summary};
pub use truth::{derive_seed, sample, sample_block, Marginal, TruthModel};
