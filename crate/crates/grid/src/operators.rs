use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::network::Network;
use crate::{GridError, Result};

/// DC power-flow operators in per unit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DcOperators {
    /// `B = A' diag(beta) A`.
    pub laplacian: DMatrix<f64>,
    /// Moore–Penrose pseudo-inverse of `B`.
    pub pseudo_inverse: DMatrix<f64>,
    /// Reference bus whose angle is fixed to zero; its balance row is the
    /// one dropped from `B theta = p`.
    pub slack: usize,
}

/// Builds `B` and its pseudo-inverse, with the first bus as slack.
pub fn build_operators(network: &Network) -> Result<DcOperators> {
    let n = network.buses.len();
    let mut b = DMatrix::<f64>::zeros(n, n);
    for br in &network.branches {
        let (i, j, beta) = (br.from, br.to, br.susceptance);
        b[(i, i)] += beta;
        b[(j, j)] += beta;
        b[(i, j)] -= beta;
        b[(j, i)] -= beta;
    }
    let eig = SymmetricEigen::new(b.clone());
    let top = eig.eigenvalues.amax();
    let cutoff = 1e-9 * top.max(1.0);
    let zeros = eig.eigenvalues.iter().filter(|l| l.abs() <= cutoff).count();
    if zeros != 1 {
        return Err(GridError::Disconnected { components: zeros });
    }
    let mut pinv = DMatrix::zeros(n, n);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() <= cutoff {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        pinv += (v * v.transpose()) / lambda;
    }
    // Symmetrize away rounding.
    let pinv = (&pinv + pinv.transpose()) * 0.5;
    Ok(DcOperators {
        laplacian: b,
        pseudo_inverse: pinv,
        slack: 0,
    })
}

impl DcOperators {
    /// Angles (radians) for balanced per-unit injections, referenced so the
    /// slack angle is zero.
    pub fn angles(&self, injections_pu: &DVector<f64>) -> DVector<f64> {
        let theta = &self.pseudo_inverse * injections_pu;
        let t0 = theta[self.slack];
        theta.map(|t| t - t0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Branch, Bus};

    fn two_bus() -> Network {
        Network {
            base_mva: 100.0,
            buses: vec![
                Bus { id: 1, load_mw: 0.0 },
                Bus { id: 2, load_mw: 0.0 },
            ],
            branches: vec![Branch {
                from: 0,
                to: 1,
                susceptance: 1.0,
                rate_mw: None,
            }],
            generators: vec![],
        }
    }

    #[test]
    fn two_bus_by_hand() {
        let ops = build_operators(&two_bus()).unwrap();
        let b = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert_eq!(ops.laplacian, b);
        assert!((ops.pseudo_inverse - b * 0.25).amax() < 1e-15);
    }

    #[test]
    fn disconnected_rejected() {
        let mut net = two_bus();
        net.buses.push(Bus { id: 3, load_mw: 0.0 });
        assert!(matches!(
            build_operators(&net),
            Err(GridError::Disconnected { components: 2 })
        ));
    }
}
