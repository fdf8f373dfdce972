//! Two-sided distributionally robust chance constraints over a Wasserstein
//! ball around a Gaussian reference.
//!
//! Everything here works on the standardized pair `(ell, u)`: a constraint
//! `ell <= x'xi <= u` with `xi ~ N(mu, Sigma)` reduces to a band for a
//! standard normal after shifting by `x'mu` and dividing by
//! `||Sigma^{1/2} x||`.

mod bound;
mod level;
mod polyline;

pub use bound::{
    apx_bound, chord_slope, endpoint_derivative_fd_check, max_g_on_boundary, segment_analysis,
    segment_tau, ApproxBound, SegmentAnalysis,
};
pub use level::{
    eval_g, eval_g_var_form, eval_gbar, eval_gunder, solve_asymptotes, solve_symmetric_u0,
    solve_u_on_levelset, truncation_point,
};
pub use polyline::{
    construct_points, polyline_contains, z0_membership, z_membership, LevelPolyline,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::Tolerances;

/// Radii below this collapse the level set and are rejected.
pub const MIN_DELTA: f64 = 1e-8;

/// Risk level and Wasserstein radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskSpec {
    epsilon: f64,
    delta: f64,
    #[serde(default)]
    tol: Tolerances,
}

impl RiskSpec {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        Self::with_tolerances(epsilon, delta, Tolerances::default())
    }

    pub fn with_tolerances(epsilon: f64, delta: f64, tol: Tolerances) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::InvalidRiskSpec(format!(
                "epsilon = {epsilon} must lie in (0, 1/2)"
            )));
        }
        if !delta.is_finite() || delta < MIN_DELTA {
            return Err(Error::InvalidRiskSpec(format!(
                "delta = {delta} must be finite and at least {MIN_DELTA:e}"
            )));
        }
        tol.validate()?;
        Ok(Self {
            epsilon,
            delta,
            tol,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    /// Phi^{-1}(1 - epsilon), the zero of the upper tail function.
    pub fn upper_quantile(&self) -> f64 {
        -crate::gaussian::quantile(self.epsilon)
    }
}

/// A two-sided band `ell <= . <= u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub ell: f64,
    pub u: f64,
}

impl Band {
    pub fn new(ell: f64, u: f64) -> Self {
        Self { ell, u }
    }

    /// The band mirrored through the origin, `(-u, -ell)`.
    pub fn reflect(self) -> Self {
        Self {
            ell: -self.u,
            u: -self.ell,
        }
    }

    /// `(1 - lambda) self + lambda other`.
    pub fn lerp(self, other: Band, lambda: f64) -> Self {
        Self {
            ell: self.ell + lambda * (other.ell - self.ell),
            u: self.u + lambda * (other.u - self.u),
        }
    }

    pub fn l1_distance(self, other: Band) -> f64 {
        (self.ell - other.ell).abs() + (self.u - other.u).abs()
    }
}

impl From<(f64, f64)> for Band {
    fn from((ell, u): (f64, f64)) -> Self {
        Self { ell, u }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn risk_spec_validation() {
        assert!(RiskSpec::new(0.05, 0.05).is_ok());
        assert!(RiskSpec::new(0.5, 0.05).is_err());
        assert!(RiskSpec::new(0.0, 0.05).is_err());
        assert!(RiskSpec::new(0.05, 0.0).is_err());
        assert!(RiskSpec::new(0.05, 1e-9).is_err());
        assert!(RiskSpec::new(0.05, f64::NAN).is_err());
        assert!(RiskSpec::new(0.05, 1e-6).is_ok());
    }

    #[test]
    fn band_helpers() {
        let b = Band::new(-1.3, 0.8);
        assert_eq!(b.reflect(), Band::new(-0.8, 1.3));
        assert_eq!(b.lerp(b.reflect(), 0.5), Band::new(-1.05, 1.05));
        assert!((b.l1_distance(b.reflect()) - 1.0).abs() < 1e-15);
    }
}
