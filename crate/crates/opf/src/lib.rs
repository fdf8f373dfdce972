//! Chance-constrained DC optimal power flow with Wasserstein robust
//! two-sided generator and branch limits.
//!
//! The pipeline is: estimate forecast-error moments from training samples,
//! [`assemble`] the conic program (one robust band per generator and per
//! rated branch), solve it, and read the result back as a [`Dispatch`].

pub mod config;
pub mod dispatch;
pub mod error;
pub mod fleet;
pub mod model;
pub mod moments;

pub use config::{CapacityOptions, ConstraintId, OpfConfig, Polylines, RiskOverride};
pub use dispatch::{solve_model, ConstraintValue, Dispatch};
pub use error::{OpfError, Result};
pub use fleet::WindFleet;
pub use model::{assemble, deterministic, DrccRecord, Layout, MembershipCheck, OpfModel};
pub use moments::{estimate_moments, MomentEstimate};
