//! `ConicProgram` -> `min 1/2 x'Px + q'x  s.t.  Ax = b,  Gx + s = h,  s in K`.

use nalgebra::{DMatrix, DVector};

use super::cone::ConeDims;
use crate::expr::AffineExpr;
use crate::program::ConicProgram;

/// A sparse row `sum coef * x[var]`.
pub type SparseRow = Vec<(usize, f64)>;

#[derive(Debug, Clone)]
pub struct StandardForm {
    pub n: usize,
    pub p: DMatrix<f64>,
    pub q: DVector<f64>,
    pub q0: f64,
    pub a: Vec<SparseRow>,
    pub b: DVector<f64>,
    pub g: Vec<SparseRow>,
    pub h: DVector<f64>,
    pub dims: ConeDims,
}

fn merged(e: &AffineExpr) -> SparseRow {
    e.clone()
        .compact()
        .terms
        .into_iter()
        .filter(|t| t.1 != 0.0)
        .collect()
}

fn negated(row: SparseRow) -> SparseRow {
    row.into_iter().map(|(v, c)| (v, -c)).collect()
}

impl StandardForm {
    pub fn from_program(prog: &ConicProgram) -> Self {
        let n = prog.num_vars;
        let mut q = DVector::zeros(n);
        for &(i, c) in &prog.objective.linear {
            q[i] += c;
        }
        let a: Vec<_> = prog.equalities.iter().map(merged).collect();
        let b = DVector::from_iterator(a.len(), prog.equalities.iter().map(|e| -e.constant));

        // expr <= 0  <=>  expr.coef x + s = -expr.const.
        let mut g: Vec<SparseRow> = prog.inequalities.iter().map(merged).collect();
        let mut h: Vec<f64> = prog.inequalities.iter().map(|e| -e.constant).collect();
        // (scalar, vector) in Q  <=>  -coef x + s = const.
        let mut soc = Vec::with_capacity(prog.soc_blocks.len());
        for blk in &prog.soc_blocks {
            soc.push(blk.dim());
            for e in std::iter::once(&blk.scalar).chain(&blk.vector) {
                g.push(negated(merged(e)));
                h.push(e.constant);
            }
        }
        Self {
            n,
            p: prog.objective.hessian(n),
            q,
            q0: prog.objective.constant,
            b,
            a,
            h: DVector::from_vec(h),
            g,
            dims: ConeDims {
                linear: prog.inequalities.len(),
                soc,
            },
        }
    }

    pub fn mul_a(&self, x: &DVector<f64>) -> DVector<f64> {
        mul_rows(&self.a, x)
    }

    pub fn mul_g(&self, x: &DVector<f64>) -> DVector<f64> {
        mul_rows(&self.g, x)
    }

    pub fn mul_at(&self, y: &DVector<f64>) -> DVector<f64> {
        mul_rows_t(&self.a, y, self.n)
    }

    pub fn mul_gt(&self, z: &DVector<f64>) -> DVector<f64> {
        mul_rows_t(&self.g, z, self.n)
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.p * x)) + self.q.dot(x) + self.q0
    }
}

fn mul_rows(rows: &[SparseRow], x: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(
        rows.len(),
        rows.iter().map(|r| r.iter().map(|&(j, c)| c * x[j]).sum::<f64>()),
    )
}

fn mul_rows_t(rows: &[SparseRow], y: &DVector<f64>, n: usize) -> DVector<f64> {
    let mut out = DVector::zeros(n);
    for (r, &yi) in rows.iter().zip(y.iter()) {
        for &(j, c) in r {
            out[j] += c * yi;
        }
    }
    out
}
