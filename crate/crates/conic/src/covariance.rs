use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{ConicError, Result};

/// Default relative ridge applied to singular covariances.
pub const DEFAULT_RIDGE: f64 = 1e-8;

/// Lower-triangular `L` with `L L' = Sigma` (possibly ridged).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceFactor {
    pub factor: DMatrix<f64>,
    /// Whether `ridge * trace / n * I` had to be added.
    pub ridged: bool,
}

/// Cholesky factor of a covariance matrix.
///
/// A matrix whose factorization fails or whose pivots collapse below
/// `1e-12` of the largest variance is treated as singular and factored as
/// `Sigma + ridge * trace(Sigma)/n * I` instead (an absolute `ridge` when the
/// trace is zero). The ridge doubles until the factorization succeeds.
pub fn factor_covariance(sigma: &DMatrix<f64>, ridge: f64) -> Result<CovarianceFactor> {
    let n = sigma.nrows();
    if sigma.ncols() != n {
        return Err(ConicError::DimensionMismatch(format!(
            "covariance is {}x{}",
            n,
            sigma.ncols()
        )));
    }
    if sigma.iter().any(|v| !v.is_finite()) {
        return Err(ConicError::Malformed("covariance has non-finite entries".into()));
    }
    let asym = (sigma - sigma.transpose()).amax();
    if asym > 1e-12 * sigma.amax().max(1.0) {
        return Err(ConicError::NotSymmetric(asym));
    }
    if n == 0 {
        return Ok(CovarianceFactor {
            factor: DMatrix::zeros(0, 0),
            ridged: false,
        });
    }
    let sym = (sigma + sigma.transpose()) * 0.5;
    let max_var = sym.diagonal().amax();
    if let Some(l) = well_conditioned_cholesky(&sym, max_var) {
        return Ok(CovarianceFactor {
            factor: l,
            ridged: false,
        });
    }
    let trace = sym.trace();
    let mut shift = if trace > 0.0 { ridge * trace / n as f64 } else { ridge };
    for _ in 0..60 {
        let mut m = sym.clone();
        for i in 0..n {
            m[(i, i)] += shift;
        }
        if let Some(l) = m.cholesky() {
            return Ok(CovarianceFactor {
                factor: l.l(),
                ridged: true,
            });
        }
        shift *= 2.0;
    }
    Err(ConicError::FactorFailed)
}

fn well_conditioned_cholesky(m: &DMatrix<f64>, max_var: f64) -> Option<DMatrix<f64>> {
    let l = m.clone().cholesky()?.l();
    let min_pivot = l.diagonal().iter().map(|d| d * d).fold(f64::INFINITY, f64::min);
    (min_pivot > 1e-12 * max_var).then_some(l)
}
