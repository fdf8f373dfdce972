//! Emitter for the polyhedral inner approximation of a Wasserstein
//! distributionally robust two-sided chance constraint
//! `P[ell <= x' xi <= u] >= 1 - eps` for every distribution within the ball.
//!
//! With `m = mu' x` and `||x||_* = ||L' x||` (`L L' = Sigma`), the constraint
//! is inner-approximated by
//!
//! ```text
//! ||L' x|| <= s
//! ell - m - l_1 s <= 0
//! u_N s - (u - m) <= 0
//! (u_i - u_{i+1}) (ell - m - l_i s) - (l_i - l_{i+1}) (u - m - u_i s) <= 0,  i = 1..N-1
//! ```
//!
//! where `(l_i, u_i)` are the polyline vertices.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use wdrcc_core::LevelPolyline;

use crate::error::{ConicError, Result};
use crate::expr::{AffineExpr, VarId};
use crate::program::ConicProgram;

/// Where an emitted constraint lives inside its program.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrccHandle {
    /// The auxiliary norm bound `s`.
    pub s_var: VarId,
    pub soc_index: usize,
    pub ineq_rows: Range<usize>,
}

/// Appends one cone and `N + 1` linear rows for the two-sided constraint.
pub fn add_two_sided_drcc(
    program: &mut ConicProgram,
    x_expr: &[AffineExpr],
    ell_expr: &AffineExpr,
    u_expr: &AffineExpr,
    mu: &DVector<f64>,
    sigma_factor: &DMatrix<f64>,
    poly: &LevelPolyline,
) -> Result<DrccHandle> {
    let k = x_expr.len();
    if mu.len() != k || sigma_factor.nrows() != k || sigma_factor.ncols() != k {
        return Err(ConicError::DimensionMismatch(format!(
            "x has {k} entries, mu {}, factor {}x{}",
            mu.len(),
            sigma_factor.nrows(),
            sigma_factor.ncols()
        )));
    }
    let pts = poly.points();
    if pts.windows(2).any(|w| !(w[0].u > w[1].u)) {
        return Err(ConicError::Malformed(
            "polyline vertices must have strictly decreasing u".into(),
        ));
    }

    let s = program.add_var(format!("drcc_s[{}]", program.soc_blocks.len()));
    let s_expr = AffineExpr::var(s);

    // ||L' x|| <= s
    let vector = (0..k)
        .map(|c| {
            let mut e = AffineExpr::zero();
            for (j, xj) in x_expr.iter().enumerate() {
                let coef = sigma_factor[(j, c)];
                if coef != 0.0 {
                    e.add_scaled(xj, coef);
                }
            }
            e
        })
        .collect();
    let soc_index = program.add_soc(vector, s_expr.clone());

    let mut mean = AffineExpr::zero();
    for (xj, &mj) in x_expr.iter().zip(mu.iter()) {
        if mj != 0.0 {
            mean.add_scaled(xj, mj);
        }
    }
    // Shifted bounds ell - m and u - m.
    let lo = ell_expr.clone() - mean.clone();
    let hi = u_expr.clone() - mean;

    let first = poly.first();
    let last = poly.last();
    let start = program.inequalities.len();
    program.add_le(lo.clone() - s_expr.clone() * first.ell);
    program.add_le(s_expr.clone() * last.u - hi.clone());
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let du = a.u - b.u;
        let dl = a.ell - b.ell;
        let left = lo.clone() - s_expr.clone() * a.ell;
        let right = hi.clone() - s_expr.clone() * a.u;
        program.add_le(left * du - right * dl);
    }
    Ok(DrccHandle {
        s_var: s,
        soc_index,
        ineq_rows: start..program.inequalities.len(),
    })
}
