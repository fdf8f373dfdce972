use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use wdrcc_conic::factor_covariance;

use crate::error::{OpfError, Result};

/// Empirical first and second moments of the forecast errors, MW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub mean: DVector<f64>,
    /// Unbiased sample covariance.
    pub covariance: DMatrix<f64>,
    /// `L` with `L L'` equal to the (possibly ridged) covariance.
    pub factor: DMatrix<f64>,
    pub ridged: bool,
    pub samples: usize,
}

/// Sample mean and covariance of the rows of `samples`.
pub fn estimate_moments(samples: &DMatrix<f64>, ridge: f64) -> Result<MomentEstimate> {
    let n = samples.nrows();
    if n < 2 {
        return Err(OpfError::TooFewSamples(n));
    }
    let mean = samples.row_mean().transpose();
    let mut centered = samples.clone();
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    let covariance = centered.transpose() * &centered / (n - 1) as f64;
    let covariance = (&covariance + covariance.transpose()) * 0.5;
    let f = factor_covariance(&covariance, ridge)?;
    Ok(MomentEstimate {
        mean,
        covariance,
        factor: f.factor,
        ridged: f.ridged,
        samples: n,
    })
}

impl MomentEstimate {
    /// Moments known exactly rather than estimated.
    pub fn exact(mean: DVector<f64>, covariance: DMatrix<f64>, ridge: f64) -> Result<Self> {
        if mean.len() != covariance.nrows() {
            return Err(OpfError::DimensionMismatch(format!(
                "mean has {} entries, covariance is {}x{}",
                mean.len(),
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        let f = factor_covariance(&covariance, ridge)?;
        Ok(Self {
            mean,
            covariance,
            factor: f.factor,
            ridged: f.ridged,
            samples: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// The same moments expressed in units of `base` (e.g. per unit).
    pub fn rescaled(&self, base: f64) -> Self {
        Self {
            mean: &self.mean / base,
            covariance: &self.covariance / (base * base),
            factor: &self.factor / base,
            ridged: self.ridged,
            samples: self.samples,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use wdrcc_oracle::SplitMix;

    #[test]
    fn constant_samples_are_ridged() {
        let s = DMatrix::from_element(5, 2, 3.0);
        let m = estimate_moments(&s, 1e-8).unwrap();
        assert_eq!(m.covariance, DMatrix::zeros(2, 2));
        assert!(m.ridged);
        assert_eq!(m.mean, DVector::from_vec(vec![3.0, 3.0]));
    }

    #[test]
    fn two_samples_one_dim() {
        let s = DMatrix::from_column_slice(2, 1, &[1.0, 4.0]);
        let m = estimate_moments(&s, 1e-8).unwrap();
        assert_eq!(m.mean[0], 2.5);
        // ((1 - 2.5)^2 + (4 - 2.5)^2) / (2 - 1)
        assert_eq!(m.covariance[(0, 0)], 4.5);
        assert!(!m.ridged);
        assert!((m.factor[(0, 0)] - 4.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn too_few_samples() {
        let s = DMatrix::from_element(1, 3, 0.0);
        assert!(matches!(estimate_moments(&s, 1e-8), Err(OpfError::TooFewSamples(1))));
    }

    #[test]
    fn standard_normal_law_of_large_numbers() {
        let mut rng = SplitMix(42);
        let s = DMatrix::from_fn(10_000, 3, |_, _| rng.normal());
        let m = estimate_moments(&s, 1e-8).unwrap();
        assert!(m.mean.amax() <= 0.05);
        assert!((m.covariance - DMatrix::identity(3, 3)).amax() <= 0.05);
    }
}
