use serde::{Deserialize, Serialize};

use crate::{GridError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    /// Bus number as written in the case file.
    pub id: i64,
    /// Real power demand, MW.
    pub load_mw: f64,
}

/// A branch between two buses, referenced by position in `Network::buses`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    /// `1 / x`, per unit.
    pub susceptance: f64,
    /// Long-term flow rating in MW; `None` when the case leaves it unlimited.
    pub rate_mw: Option<f64>,
}

/// `c2 p^2 + c1 p + c0` with `p` in MW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolynomialCost {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl PolynomialCost {
    pub fn eval(&self, p_mw: f64) -> f64 {
        (self.c2 * p_mw + self.c1) * p_mw + self.c0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    /// Position of the host bus in `Network::buses`.
    pub bus: usize,
    pub pmin_mw: f64,
    pub pmax_mw: f64,
    pub cost: PolynomialCost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub generators: Vec<Generator>,
}

impl Network {
    pub fn bus_index(&self, id: i64) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    pub fn total_load_mw(&self) -> f64 {
        self.buses.iter().map(|b| b.load_mw).sum()
    }

    /// Branches with a finite flow rating.
    pub fn limited_branches(&self) -> impl Iterator<Item = (usize, &Branch)> {
        self.branches
            .iter()
            .enumerate()
            .filter(|(_, b)| b.rate_mw.is_some())
    }

    /// Multiplies every finite rating by `factor`.
    pub fn scale_capacities(&mut self, factor: f64) {
        for b in &mut self.branches {
            if let Some(r) = &mut b.rate_mw {
                *r *= factor;
            }
        }
    }

    /// Gives every unrated branch the rating `rate_mw`, so that its flow
    /// chance constraint is emitted rather than skipped.
    pub fn rate_unrated(&mut self, rate_mw: f64) {
        for b in &mut self.branches {
            if b.rate_mw.is_none() {
                b.rate_mw = Some(rate_mw);
            }
        }
    }

    /// Number of connected components of the bus graph.
    pub fn components(&self) -> usize {
        let n = self.buses.len();
        let mut adj = vec![Vec::new(); n];
        for b in &self.branches {
            adj[b.from].push(b.to);
            adj[b.to].push(b.from);
        }
        let mut seen = vec![false; n];
        let mut count = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }

    /// Checks the structural invariants.
    pub fn validate(&self) -> Result<()> {
        if !(self.base_mva > 0.0) {
            return Err(GridError::Invalid(format!("baseMVA = {}", self.base_mva)));
        }
        let n = self.buses.len();
        for (k, b) in self.branches.iter().enumerate() {
            if b.from >= n || b.to >= n {
                return Err(GridError::Invalid(format!("branch {k} endpoint out of range")));
            }
            if !b.susceptance.is_finite() {
                return Err(GridError::Invalid(format!("branch {k} susceptance")));
            }
            if let Some(r) = b.rate_mw {
                if !(r > 0.0) {
                    return Err(GridError::Invalid(format!("branch {k} rating {r}")));
                }
            }
        }
        for (k, g) in self.generators.iter().enumerate() {
            if g.bus >= n {
                return Err(GridError::Invalid(format!("generator {k} bus out of range")));
            }
            if g.pmin_mw > g.pmax_mw {
                return Err(GridError::Invalid(format!(
                    "generator {k}: Pmin {} > Pmax {}",
                    g.pmin_mw, g.pmax_mw
                )));
            }
        }
        let components = self.components();
        if components != 1 {
            return Err(GridError::Disconnected { components });
        }
        Ok(())
    }

    /// Canonical pretty JSON.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let net: Self = serde_json::from_str(text)?;
        net.validate()?;
        Ok(net)
    }
}
