//! Solver-agnostic conic program.
//!
//! The JSON interchange format is the serde form of [`ConicProgram`]:
//!
//! ```text
//! {
//!   "num_vars": 3,
//!   "var_names": ["x", "y", "t"],          // optional labels, may be empty
//!   "objective": {
//!     "quadratic": [[0, 0, 1.5], [0, 1, -0.2]],   // sum c * x_i * x_j
//!     "linear":    [[2, 1.0]],                    // sum c * x_i
//!     "constant":  0.0
//!   },
//!   "equalities":   [{"terms": [[0, 1.0]], "constant": -1.0}],   // expr == 0
//!   "inequalities": [{"terms": [[1, -1.0]], "constant": 0.0}],   // expr <= 0
//!   "soc_blocks": [
//!     {"vector": [{"terms": [[0, 1.0]], "constant": 0.0}],
//!      "scalar": {"terms": [[2, 1.0]], "constant": 0.0}}         // ||vector|| <= scalar
//!   ]
//! }
//! ```
//!
//! The objective is minimized. Quadratic entries are summed as written,
//! so `[i, j, c]` with `i != j` contributes `c x_i x_j` once.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{ConicError, Result};
use crate::expr::{AffineExpr, VarId};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub quadratic: Vec<(VarId, VarId, f64)>,
    pub linear: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl Objective {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant
            + self.linear.iter().map(|&(i, c)| c * x[i]).sum::<f64>()
            + self
                .quadratic
                .iter()
                .map(|&(i, j, c)| c * x[i] * x[j])
                .sum::<f64>()
    }

    /// Dense symmetric `P` with the objective's quadratic part equal to
    /// `x' P x / 2`.
    pub fn hessian(&self, n: usize) -> DMatrix<f64> {
        let mut p = DMatrix::zeros(n, n);
        for &(i, j, c) in &self.quadratic {
            if i == j {
                p[(i, i)] += 2.0 * c;
            } else {
                p[(i, j)] += c;
                p[(j, i)] += c;
            }
        }
        p
    }
}

/// `||vector||_2 <= scalar`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocBlock {
    pub vector: Vec<AffineExpr>,
    pub scalar: AffineExpr,
}

impl SocBlock {
    /// Cone dimension including the scalar.
    pub fn dim(&self) -> usize {
        self.vector.len() + 1
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConicProgram {
    pub num_vars: usize,
    #[serde(default)]
    pub var_names: Vec<String>,
    pub objective: Objective,
    pub equalities: Vec<AffineExpr>,
    pub inequalities: Vec<AffineExpr>,
    pub soc_blocks: Vec<SocBlock>,
}

impl ConicProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>) -> VarId {
        let id = self.num_vars;
        self.num_vars += 1;
        self.var_names.push(name.into());
        id
    }

    pub fn add_vars(&mut self, prefix: &str, count: usize) -> Vec<VarId> {
        (0..count)
            .map(|k| self.add_var(format!("{prefix}[{k}]")))
            .collect()
    }

    /// `expr == 0`; returns the row index.
    pub fn add_eq(&mut self, expr: AffineExpr) -> usize {
        self.equalities.push(expr.compact());
        self.equalities.len() - 1
    }

    /// `expr <= 0`; returns the row index.
    pub fn add_le(&mut self, expr: AffineExpr) -> usize {
        self.inequalities.push(expr.compact());
        self.inequalities.len() - 1
    }

    /// `||vector|| <= scalar`; returns the block index.
    pub fn add_soc(&mut self, vector: Vec<AffineExpr>, scalar: AffineExpr) -> usize {
        self.soc_blocks.push(SocBlock {
            vector: vector.into_iter().map(AffineExpr::compact).collect(),
            scalar: scalar.compact(),
        });
        self.soc_blocks.len() - 1
    }

    pub fn add_linear_cost(&mut self, v: VarId, c: f64) {
        self.objective.linear.push((v, c));
    }

    pub fn add_quadratic_cost(&mut self, i: VarId, j: VarId, c: f64) {
        self.objective.quadratic.push((i, j, c));
    }

    /// Checks variable indices, finiteness and that the quadratic form is
    /// positive semidefinite.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars;
        let check_expr = |e: &AffineExpr, what: &str| -> Result<()> {
            if let Some(v) = e.max_var() {
                if v >= n {
                    return Err(ConicError::Malformed(format!(
                        "{what} references variable {v} but program has {n}"
                    )));
                }
            }
            if !e.constant.is_finite() || e.terms.iter().any(|t| !t.1.is_finite()) {
                return Err(ConicError::Malformed(format!("{what} has a non-finite coefficient")));
            }
            Ok(())
        };
        for e in &self.equalities {
            check_expr(e, "equality")?;
        }
        for e in &self.inequalities {
            check_expr(e, "inequality")?;
        }
        for b in &self.soc_blocks {
            check_expr(&b.scalar, "cone scalar")?;
            for e in &b.vector {
                check_expr(e, "cone vector")?;
            }
        }
        for &(i, c) in &self.objective.linear {
            if i >= n || !c.is_finite() {
                return Err(ConicError::Malformed("bad linear objective term".into()));
            }
        }
        for &(i, j, c) in &self.objective.quadratic {
            if i >= n || j >= n || !c.is_finite() {
                return Err(ConicError::Malformed("bad quadratic objective term".into()));
            }
        }
        if !self.objective.quadratic.is_empty() {
            let p = self.objective.hessian(n);
            let scale = p.amax().max(1.0);
            if self.is_diagonal_objective() {
                if p.diagonal().iter().any(|&d| d < -1e-12 * scale) {
                    return Err(ConicError::NotConvex);
                }
            } else {
                let min_eig = SymmetricEigen::new(p).eigenvalues.min();
                if min_eig < -1e-9 * scale {
                    return Err(ConicError::NotConvex);
                }
            }
        }
        Ok(())
    }

    fn is_diagonal_objective(&self) -> bool {
        self.objective.quadratic.iter().all(|t| t.0 == t.1)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| ConicError::Malformed(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text).map_err(|e| ConicError::Malformed(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    /// Largest constraint violation of `x` (equalities in absolute value,
    /// inequalities and cones by positive part).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let eq = self.equalities.iter().map(|e| e.eval(x).abs());
        let le = self.inequalities.iter().map(|e| e.eval(x).max(0.0));
        let soc = self.soc_blocks.iter().map(|b| {
            let norm = b.vector.iter().map(|e| e.eval(x).powi(2)).sum::<f64>().sqrt();
            (norm - b.scalar.eval(x)).max(0.0)
        });
        eq.chain(le).chain(soc).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ConicProgram {
        let mut p = ConicProgram::new();
        let x = p.add_var("x");
        let t = p.add_var("t");
        p.add_quadratic_cost(x, x, 1.0);
        p.add_linear_cost(t, 1.0);
        p.add_eq(AffineExpr::var(x) - AffineExpr::constant(1.0));
        p.add_le(-AffineExpr::var(t));
        p.add_soc(vec![AffineExpr::var(x)], AffineExpr::var(t));
        p
    }

    #[test]
    fn json_roundtrip() {
        let p = small();
        let text = p.to_json().unwrap();
        assert!(text.contains("\"soc_blocks\""));
        assert_eq!(ConicProgram::from_json(&text).unwrap(), p);
    }

    #[test]
    fn validation_catches_bad_index_and_nonconvexity() {
        let mut p = small();
        p.add_le(AffineExpr::var(7));
        assert!(matches!(p.validate(), Err(ConicError::Malformed(_))));
        let mut p = small();
        p.add_quadratic_cost(0, 0, -3.0);
        assert!(matches!(p.validate(), Err(ConicError::NotConvex)));
        let mut p = small();
        p.add_quadratic_cost(0, 1, 5.0);
        assert!(matches!(p.validate(), Err(ConicError::NotConvex)));
    }

    #[test]
    fn hessian_convention() {
        let p = small();
        let h = p.objective.hessian(2);
        assert_eq!(h[(0, 0)], 2.0);
        let x = [3.0, 0.5];
        let quad = 0.5 * x[0] * h[(0, 0)] * x[0];
        assert_eq!(p.objective.eval(&x), quad + 0.5);
    }

    #[test]
    fn violation() {
        let p = small();
        assert_eq!(p.max_violation(&[1.0, 1.0]), 0.0);
        assert!((p.max_violation(&[1.0, 0.25]) - 0.75).abs() < 1e-15);
    }
}
