//! Out-of-sample evaluation of a fixed dispatch.
//!
//! For an error realization `xi` (MW, one entry per wind bus) the recourse
//! output of generator g is `p_g - alpha_g * sum(xi)`, and the flow on a
//! branch moves by `beta * (e_i - e_j)' B^+ dinj` with `dinj` the injection
//! deviation: `xi` at the wind buses, `-alpha_g sum(xi)` at the generators.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use wdrcc_grid::{DcOperators, Network};
use wdrcc_opf::{ConstraintId, Dispatch, WindFleet};

use crate::error::{Result, StochasticsError};

/// Slack (MW) before a limit counts as violated; absorbs solver rounding
/// on schedules that sit exactly on a limit.
pub const FEASIBILITY_TOL_MW: f64 = 1e-4;

/// Rows per work block; results do not depend on it.
const BLOCK_ROWS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OosMode {
    /// A sample succeeds only if every band holds.
    Joint,
    /// Success frequency of each band on its own.
    PerConstraint,
}

/// One band `lo <= nominal + c' xi <= hi`.
#[derive(Debug, Clone)]
struct Row {
    id: ConstraintId,
    nominal: f64,
    lo: f64,
    hi: f64,
    coef: DVector<f64>,
}

/// The affine maps from errors to every generator output and rated flow.
#[derive(Debug, Clone)]
pub struct OosEvaluator {
    rows: Vec<Row>,
    dim: usize,
}

impl OosEvaluator {
    pub fn new(
        dispatch: &Dispatch,
        network: &Network,
        operators: &DcOperators,
        fleet: &WindFleet,
    ) -> Result<Self> {
        let ng = network.generators.len();
        let nb = network.buses.len();
        if dispatch.p_mw.len() != ng || dispatch.alpha.len() != ng || dispatch.theta_rad.len() != nb {
            return Err(StochasticsError::DimensionMismatch(format!(
                "dispatch has {} outputs, {} factors, {} angles for {ng} generators and {nb} buses",
                dispatch.p_mw.len(),
                dispatch.alpha.len(),
                dispatch.theta_rad.len()
            )));
        }
        let k = fleet.len();
        let wind = fleet.bus_indices(network)?;
        let mut rows = Vec::new();
        for (gi, g) in network.generators.iter().enumerate() {
            rows.push(Row {
                id: ConstraintId::Generator(gi),
                nominal: dispatch.p_mw[gi],
                lo: g.pmin_mw,
                hi: g.pmax_mw,
                coef: DVector::from_element(k, -dispatch.alpha[gi]),
            });
        }
        let pinv = &operators.pseudo_inverse;
        let flows = dispatch.flows_mw(network);
        for (bi, br) in network.limited_branches() {
            let rate = br.rate_mw.expect("limited branch");
            let w = |bus: usize| br.susceptance * (pinv[(bus, br.from)] - pinv[(bus, br.to)]);
            let shared: f64 = network
                .generators
                .iter()
                .zip(&dispatch.alpha)
                .map(|(g, a)| a * w(g.bus))
                .sum();
            rows.push(Row {
                id: ConstraintId::Branch(bi),
                nominal: flows[bi],
                lo: -rate,
                hi: rate,
                coef: DVector::from_iterator(k, wind.iter().map(|&b| w(b) - shared)),
            });
        }
        Ok(Self { rows, dim: k })
    }

    pub fn constraint_ids(&self) -> Vec<ConstraintId> {
        self.rows.iter().map(|r| r.id).collect()
    }

    fn holds(row: &Row, xi: &[f64]) -> bool {
        let v = row.nominal + row.coef.iter().zip(xi).map(|(c, x)| c * x).sum::<f64>();
        v >= row.lo - FEASIBILITY_TOL_MW && v <= row.hi + FEASIBILITY_TOL_MW
    }

    /// Success counts per row plus the joint count, over `samples` rows.
    fn count(&self, samples: &DMatrix<f64>, first: usize, len: usize) -> (Vec<usize>, usize) {
        let mut per = vec![0usize; self.rows.len()];
        let mut joint = 0;
        let mut xi = vec![0.0; self.dim];
        for r in first..first + len {
            for (j, v) in xi.iter_mut().enumerate() {
                *v = samples[(r, j)];
            }
            let mut all = true;
            for (c, row) in per.iter_mut().zip(&self.rows) {
                if Self::holds(row, &xi) {
                    *c += 1;
                } else {
                    all = false;
                }
            }
            joint += all as usize;
        }
        (per, joint)
    }

    /// Success counts evaluated in parallel over fixed row blocks; integer
    /// sums make the result independent of scheduling.
    fn counts(&self, samples: &DMatrix<f64>) -> Result<(Vec<usize>, usize)> {
        if samples.ncols() != self.dim {
            return Err(StochasticsError::DimensionMismatch(format!(
                "samples have {} columns, fleet has {} buses",
                samples.ncols(),
                self.dim
            )));
        }
        let n = samples.nrows();
        if n == 0 {
            return Err(StochasticsError::DimensionMismatch("no samples".into()));
        }
        let blocks: Vec<(usize, usize)> = (0..n)
            .step_by(BLOCK_ROWS)
            .map(|s| (s, BLOCK_ROWS.min(n - s)))
            .collect();
        let parts: Vec<(Vec<usize>, usize)> = std::thread::scope(|scope| {
            let handles: Vec<_> = blocks
                .iter()
                .map(|&(s, l)| scope.spawn(move || self.count(samples, s, l)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("evaluation thread panicked"))
                .collect()
        });
        let mut per = vec![0usize; self.rows.len()];
        let mut joint = 0;
        for (p, j) in parts {
            for (a, b) in per.iter_mut().zip(p) {
                *a += b;
            }
            joint += j;
        }
        Ok((per, joint))
    }

    /// Fraction of samples satisfying every band at once.
    pub fn joint(&self, samples: &DMatrix<f64>) -> Result<f64> {
        let (_, joint) = self.counts(samples)?;
        Ok(joint as f64 / samples.nrows() as f64)
    }

    /// Success frequency of each band, in [`OosEvaluator::constraint_ids`] order.
    pub fn per_constraint(&self, samples: &DMatrix<f64>) -> Result<Vec<(ConstraintId, f64)>> {
        let (per, _) = self.counts(samples)?;
        let n = samples.nrows() as f64;
        Ok(self.rows.iter().zip(per).map(|(r, c)| (r.id, c as f64 / n)).collect())
    }
}

/// Joint out-of-sample success probability of `dispatch` on `samples`
/// (MW errors, one row per realization).
pub fn oos_violation(
    dispatch: &Dispatch,
    network: &Network,
    operators: &DcOperators,
    fleet: &WindFleet,
    samples: &DMatrix<f64>,
) -> Result<f64> {
    OosEvaluator::new(dispatch, network, operators, fleet)?.joint(samples)
}
