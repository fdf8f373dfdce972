use serde::{Deserialize, Serialize};
use wdrcc_conic::{solve_with, KktResiduals, Settings, Solution, Status};
use wdrcc_grid::Network;

use crate::config::ConstraintId;
use crate::error::Result;
use crate::model::OpfModel;

/// Auxiliary norm bound of one chance constraint at the optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintValue {
    pub id: ConstraintId,
    /// `s >= ||L' x||`, MW.
    pub s_mw: f64,
}

/// A solved dispatch in physical units. Holds no timings, so equal inputs
/// give equal dispatches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dispatch {
    pub status: Status,
    /// Generation cost at the schedule, $/h.
    pub objective: f64,
    pub p_mw: Vec<f64>,
    /// Participation factors (all zero for a deterministic dispatch).
    pub alpha: Vec<f64>,
    pub theta_rad: Vec<f64>,
    pub constraints: Vec<ConstraintValue>,
    pub kkt_residuals: KktResiduals,
    pub iterations: usize,
}

impl Dispatch {
    pub fn from_solution(model: &OpfModel, sol: &Solution) -> Self {
        let x = &sol.primal;
        let base = model.base_mva;
        let l = &model.layout;
        let alpha = if l.alpha.is_empty() {
            vec![0.0; l.p.len()]
        } else {
            l.alpha.iter().map(|&v| x[v]).collect()
        };
        Self {
            status: sol.status,
            objective: sol.objective_value,
            p_mw: l.p.iter().map(|&v| x[v] * base).collect(),
            alpha,
            theta_rad: l.theta.iter().map(|&v| x[v]).collect(),
            constraints: model
                .drccs
                .iter()
                .map(|r| ConstraintValue {
                    id: r.id,
                    s_mw: x[r.handle.s_var] * base,
                })
                .collect(),
            kkt_residuals: sol.kkt_residuals,
            iterations: sol.iterations,
        }
    }

    /// Nominal flow on every branch, MW.
    pub fn flows_mw(&self, network: &Network) -> Vec<f64> {
        network
            .branches
            .iter()
            .map(|b| network.base_mva * b.susceptance * (self.theta_rad[b.from] - self.theta_rad[b.to]))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Solves `model` and returns both the raw solution and the dispatch.
pub fn solve_model(model: &OpfModel, tol: f64) -> Result<(Solution, Dispatch)> {
    let settings = Settings {
        tol,
        ..Settings::default()
    };
    let sol = solve_with(&model.program, &settings)?;
    let dispatch = Dispatch::from_solution(model, &sol);
    Ok((sol, dispatch))
}
