//! Approximation-bound table over a grid of risk levels, radii and piece
//! counts, with the attained boundary maximum for comparison.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use wdrcc_core::wdrcc::{apx_bound, construct_points, max_g_on_boundary};
use wdrcc_core::RiskSpec;

use crate::error::Result;
use crate::manifest::{num, Table};

pub const SCHEMA: &str = "wdrcc.apxbd/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApxBdOptions {
    pub epsilons: Vec<f64>,
    pub deltas: Vec<f64>,
    pub pieces: Vec<usize>,
}

impl Default for ApxBdOptions {
    fn default() -> Self {
        Self {
            epsilons: vec![0.01, 0.05],
            deltas: vec![0.01, 0.05, 0.1],
            pieces: vec![3, 5, 9, 19, 29],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApxBdRow {
    pub epsilon: f64,
    pub delta: f64,
    pub pieces: usize,
    /// Upper bound on `max g / delta` over the polyline boundary.
    pub bound: f64,
    pub tau_sq_max: f64,
    pub tail_upper_ratio: f64,
    pub tail_lower_ratio: f64,
    /// The attained `max g / delta`.
    pub max_g_ratio: f64,
}

pub fn apxbd_cell(epsilon: f64, delta: f64, pieces: usize) -> Result<ApxBdRow> {
    let spec = RiskSpec::new(epsilon, delta)?;
    let poly = construct_points(&spec, pieces)?;
    let b = apx_bound(&spec, &poly)?;
    let max_g = max_g_on_boundary(&spec, &poly)?;
    Ok(ApxBdRow {
        epsilon,
        delta,
        pieces,
        bound: b.bound,
        tau_sq_max: b.tau_sq_max,
        tail_upper_ratio: b.tail_upper / delta,
        tail_lower_ratio: b.tail_lower / delta,
        max_g_ratio: max_g / delta,
    })
}

/// Rows in (epsilon, delta, pieces) lexicographic order of the inputs.
pub fn apxbd_rows(opts: &ApxBdOptions) -> Result<Vec<ApxBdRow>> {
    let mut cells = Vec::new();
    for &e in &opts.epsilons {
        for &d in &opts.deltas {
            for &n in &opts.pieces {
                cells.push((e, d, n));
            }
        }
    }
    cells.into_par_iter().map(|(e, d, n)| apxbd_cell(e, d, n)).collect()
}

pub fn apxbd_table(rows: &[ApxBdRow]) -> Table {
    let mut t = Table::new(
        SCHEMA,
        &[
            "epsilon",
            "delta",
            "pieces",
            "apx_bd",
            "tau_sq_max",
            "tail_upper_ratio",
            "tail_lower_ratio",
            "max_g_ratio",
        ],
    );
    for r in rows {
        t.push(vec![
            num(r.epsilon),
            num(r.delta),
            r.pieces.to_string(),
            num(r.bound),
            num(r.tau_sq_max),
            num(r.tail_upper_ratio),
            num(r.tail_lower_ratio),
            num(r.max_g_ratio),
        ]);
    }
    t
}
