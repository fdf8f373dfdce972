//! Wasserstein distributionally robust two-sided chance constraints.
//!
//! [`gaussian`] provides the scalar normal analytics, [`wdrcc`] the robust
//! band function, its level curve, the polyhedral inner approximation and
//! its error bound.

pub mod error;
pub mod gaussian;
pub mod quadrature;
pub mod roots;
pub mod wdrcc;

pub use error::{Error, Result};
pub use gaussian::Tolerances;
pub use wdrcc::{Band, LevelPolyline, RiskSpec};
