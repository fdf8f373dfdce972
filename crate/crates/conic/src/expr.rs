use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Index of a decision variable in a [`ConicProgram`](crate::ConicProgram).
pub type VarId = usize;

/// A sparse affine expression `sum_k coef_k * x[var_k] + constant`.
///
/// Terms are not kept sorted or merged; [`AffineExpr::compact`] does that
/// when it matters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AffineExpr {
    pub terms: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl AffineExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn var(v: VarId) -> Self {
        Self::term(v, 1.0)
    }

    pub fn term(v: VarId, coef: f64) -> Self {
        Self {
            terms: vec![(v, coef)],
            constant: 0.0,
        }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (VarId, f64)>, constant: f64) -> Self {
        Self {
            terms: terms.into_iter().collect(),
            constant,
        }
    }

    pub fn add_term(&mut self, v: VarId, coef: f64) -> &mut Self {
        self.terms.push((v, coef));
        self
    }

    /// `self += coef * other`.
    pub fn add_scaled(&mut self, other: &AffineExpr, coef: f64) -> &mut Self {
        self.terms
            .extend(other.terms.iter().map(|&(v, c)| (v, c * coef)));
        self.constant += coef * other.constant;
        self
    }

    pub fn scaled(&self, coef: f64) -> Self {
        let mut out = Self::zero();
        out.add_scaled(self, coef);
        out
    }

    /// Merges duplicate variables and drops exact zeros.
    pub fn compact(mut self) -> Self {
        self.terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(VarId, f64)> = Vec::with_capacity(self.terms.len());
        for (v, c) in self.terms {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += c,
                _ => merged.push((v, c)),
            }
        }
        merged.retain(|t| t.1 != 0.0);
        Self {
            terms: merged,
            constant: self.constant,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(v, c)| c * x[v]).sum::<f64>()
    }

    pub fn max_var(&self) -> Option<VarId> {
        self.terms.iter().map(|t| t.0).max()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.1 == 0.0)
    }
}

impl From<f64> for AffineExpr {
    fn from(c: f64) -> Self {
        Self::constant(c)
    }
}

impl Add for AffineExpr {
    type Output = AffineExpr;
    fn add(mut self, rhs: AffineExpr) -> AffineExpr {
        self.add_scaled(&rhs, 1.0);
        self
    }
}

impl Sub for AffineExpr {
    type Output = AffineExpr;
    fn sub(mut self, rhs: AffineExpr) -> AffineExpr {
        self.add_scaled(&rhs, -1.0);
        self
    }
}

impl Neg for AffineExpr {
    type Output = AffineExpr;
    fn neg(self) -> AffineExpr {
        self.scaled(-1.0)
    }
}

impl Mul<f64> for AffineExpr {
    type Output = AffineExpr;
    fn mul(self, rhs: f64) -> AffineExpr {
        self.scaled(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_eval() {
        let e = AffineExpr::var(0) * 2.0 + AffineExpr::term(1, -1.0) - AffineExpr::constant(3.0);
        assert_eq!(e.eval(&[1.0, 4.0]), 2.0 - 4.0 - 3.0);
        let c = (e.clone() + AffineExpr::var(0)).compact();
        assert_eq!(c.terms, vec![(0, 3.0), (1, -1.0)]);
        assert_eq!((-e).constant, 3.0);
    }

    #[test]
    fn compact_drops_cancelled_terms() {
        let e = (AffineExpr::var(2) - AffineExpr::var(2)).compact();
        assert!(e.terms.is_empty());
        assert!(e.is_constant());
    }
}
