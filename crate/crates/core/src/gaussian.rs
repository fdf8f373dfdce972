//! Scalar standard-Gaussian analytics.
//!
//! The unchecked helpers ([`cdf`], [`pdf`], [`cdf_integral`]) accept infinite
//! arguments and are what the level-set code calls in its inner loops; the
//! `std_*` functions are the checked public surface.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};
use libm::erfc;
use statrs::function::erf::erfc_inv;

use crate::error::{Error, Result};

/// 1/sqrt(2*pi), the density at zero.
pub const PDF_AT_ZERO: f64 = 0.398_942_280_401_432_7;

/// Numerical tolerances shared by every evaluation in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Scalar function evaluation and membership slack.
    pub abs_tol: f64,
    /// Residual tolerance for root finding on g.
    pub root_tol: f64,
    /// Quadrature tolerance for the VaR-form evaluation.
    pub quad_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            root_tol: 1e-10,
            quad_tol: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn new(abs_tol: f64, root_tol: f64, quad_tol: f64) -> Result<Self> {
        let t = Self {
            abs_tol,
            root_tol,
            quad_tol,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.abs_tol, self.root_tol, self.quad_tol];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidTolerances(
                "tolerances must be finite and strictly positive".into(),
            ));
        }
        if self.root_tol < self.abs_tol {
            return Err(Error::InvalidTolerances(
                "root_tol must be at least abs_tol".into(),
            ));
        }
        Ok(())
    }
}

fn check_finite(z: f64) -> Result<f64> {
    if z.is_finite() {
        Ok(z)
    } else {
        Err(Error::NonFinite(z))
    }
}

/// Phi(z), defined for all extended reals.
#[inline]
pub fn cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// phi(z), zero at +-infinity.
#[inline]
pub fn pdf(z: f64) -> f64 {
    PDF_AT_ZERO * (-0.5 * z * z).exp()
}

/// `int_0^z Phi(v) dv = z Phi(z) + phi(z) - phi(0)`.
#[inline]
pub fn cdf_integral(z: f64) -> f64 {
    // z Phi(z) + phi(z) -> 0 as z -> -inf; guard the 0 * inf product.
    if z == f64::NEG_INFINITY {
        return -PDF_AT_ZERO;
    }
    z * cdf(z) + pdf(z) - PDF_AT_ZERO
}

/// Standard normal CDF.
pub fn std_cdf(z: f64) -> Result<f64> {
    check_finite(z).map(cdf)
}

/// Standard normal density.
pub fn std_pdf(z: f64) -> Result<f64> {
    check_finite(z).map(pdf)
}

/// Antiderivative of the CDF anchored at zero.
pub fn cdf_antiderivative(z: f64) -> Result<f64> {
    check_finite(z).map(cdf_integral)
}

/// Standard normal quantile.
///
/// Seeds from the inverse complementary error function and polishes with
/// Newton steps, falling back to bisection whenever a step leaves the
/// current bracket.
pub fn std_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    // Seed on the lower half where erfc_inv is best conditioned.
    let tail = p.min(1.0 - p);
    let seed = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * tail);
    let seed = if p > 0.5 { -seed } else { seed };
    Ok(polish_quantile(p, seed))
}

fn polish_quantile(p: f64, seed: f64) -> f64 {
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    let mut z = if seed.is_finite() { seed.clamp(lo, hi) } else { 0.0 };
    for _ in 0..100 {
        let f = cdf(z) - p;
        if f == 0.0 {
            return z;
        }
        if f < 0.0 {
            lo = lo.max(z);
        } else {
            hi = hi.min(z);
        }
        let d = pdf(z);
        let newton = if d > 0.0 { z - f / d } else { f64::NAN };
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - z).abs() <= 1e-15 * (1.0 + z.abs()) {
            return next;
        }
        z = next;
    }
    z
}

/// Phi^{-1} for internal callers that have already validated `p`.
pub(crate) fn quantile(p: f64) -> f64 {
    std_quantile(p).expect("probability validated by caller")
}

#[cfg(test)]
mod tests {
    use super::*;
    use wdrcc_oracle as oracle;

    #[test]
    fn cdf_trivial_values() {
        assert_eq!(std_cdf(0.0).unwrap(), 0.5);
        assert!((std_cdf(8.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(std_cdf(f64::NAN).is_err());
        assert!(std_cdf(f64::INFINITY).is_err());
    }

    #[test]
    fn cdf_relative_accuracy() {
        // 30-digit reference values.
        let cases = [
            (-1.0, 0.158_655_253_931_457_05),
            (-5.0, 2.866_515_718_791_939_1e-7),
            (-10.0, 7.619_853_024_160_526e-24),
            (-20.0, 2.753_624_118_606_233_7e-89),
            (0.3, 0.617_911_422_188_952_6),
            (2.5, 0.993_790_334_674_223_9),
        ];
        for (z, want) in cases {
            let got = std_cdf(z).unwrap();
            assert!(((got - want) / want).abs() < 1e-13, "z={z}: {got} vs {want}");
        }
    }

    #[test]
    fn cdf_roundtrip_at_095() {
        let z = oracle::normal_quantile(0.95);
        assert!((std_cdf(z).unwrap() - 0.95).abs() < 1e-14);
    }

    #[test]
    fn pdf_values() {
        assert!((std_pdf(0.0).unwrap() - 0.398_942_280_4).abs() < 1e-10);
        assert_eq!(std_pdf(3.0).unwrap(), std_pdf(-3.0).unwrap());
        assert!((std_pdf(1.0).unwrap() - 0.241_970_724_5).abs() < 1e-10);
        assert!((std_pdf(1.0).unwrap() - oracle::normal_pdf(1.0)).abs() < 1e-16);
    }

    #[test]
    fn quantile_values() {
        assert_eq!(std_quantile(0.5).unwrap(), 0.0);
        for p in [1e-6, 0.01, 0.2, 0.37] {
            let a = std_quantile(p).unwrap();
            let b = std_quantile(1.0 - p).unwrap();
            assert!((a + b).abs() < 1e-9, "p={p}: {a} vs {b}");
        }
        let q = std_quantile(0.95).unwrap();
        assert!((q - 1.644_853_6).abs() < 1e-7);
        assert!((q - oracle::normal_quantile(0.95)).abs() < 1e-12);
        assert!(std_quantile(0.0).is_err());
        assert!(std_quantile(1.0).is_err());
        assert!(std_quantile(f64::NAN).is_err());
    }

    #[test]
    fn quantile_roundtrip_grid() {
        let tol = Tolerances::default();
        let mut ps = vec![1e-6, 1.0 - 1e-6];
        ps.extend((1..1000).map(|k| k as f64 / 1000.0));
        for p in ps {
            let z = std_quantile(p).unwrap();
            assert!((std_cdf(z).unwrap() - p).abs() <= tol.root_tol, "p={p}");
        }
    }

    #[test]
    fn antiderivative_values() {
        assert_eq!(cdf_antiderivative(0.0).unwrap(), 0.0);
        let z = 12.0;
        assert!((cdf_antiderivative(z).unwrap() - (z - PDF_AT_ZERO)).abs() < 1e-12);
        let quad = oracle::simpson(&oracle::normal_cdf, 0.0, 1.0, 1e-14);
        assert!((cdf_antiderivative(1.0).unwrap() - quad).abs() < 1e-10);
        assert!(cdf_antiderivative(f64::NAN).is_err());
    }

    #[test]
    fn antiderivative_derivative_is_cdf() {
        let h = 1e-5;
        for z in [-4.0, -1.3, 0.0, 0.7, 2.5] {
            let fd = (cdf_integral(z + h) - cdf_integral(z - h)) / (2.0 * h);
            assert!((fd - cdf(z)).abs() < 1e-9);
        }
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerances::default().validate().is_ok());
        assert!(Tolerances::new(1e-12, 1e-13, 1e-9).is_err());
        assert!(Tolerances::new(0.0, 1e-10, 1e-9).is_err());
    }

    #[test]
    fn infinite_arguments_in_unchecked_helpers() {
        assert_eq!(cdf(f64::INFINITY), 1.0);
        assert_eq!(cdf(f64::NEG_INFINITY), 0.0);
        assert_eq!(pdf(f64::INFINITY), 0.0);
        assert_eq!(cdf_integral(f64::NEG_INFINITY), -PDF_AT_ZERO);
    }
}
