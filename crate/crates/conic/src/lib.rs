//! Conic programs: a solver-agnostic representation, the emitter for robust
//! two-sided chance constraints, and a reference interior-point solver.

pub mod covariance;
pub mod drcc;
pub mod error;
pub mod expr;
pub mod program;
pub mod regression;
pub mod solver;

pub use covariance::{factor_covariance, CovarianceFactor};
pub use drcc::{add_two_sided_drcc, DrccHandle};
pub use error::{ConicError, Result};
pub use expr::{AffineExpr, VarId};
pub use program::{ConicProgram, Objective, SocBlock};
pub use solver::{solve, solve_with, KktResiduals, Settings, Solution, Status};
