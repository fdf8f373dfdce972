use serde::{Deserialize, Serialize};
use wdrcc_grid::Network;

use crate::error::{OpfError, Result};

/// Renewable injections: a forecast at each hosting bus plus a zero-mean
/// forecast error whose distribution is only known through samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindFleet {
    /// Bus ids as written in the case file.
    pub buses: Vec<i64>,
    /// Forecast output, MW.
    pub forecast_mw: Vec<f64>,
}

impl WindFleet {
    pub fn new(buses: Vec<i64>, forecast_mw: Vec<f64>) -> Result<Self> {
        let f = Self { buses, forecast_mw };
        if f.buses.len() != f.forecast_mw.len() {
            return Err(OpfError::Fleet(format!(
                "{} buses but {} forecasts",
                f.buses.len(),
                f.forecast_mw.len()
            )));
        }
        if let Some(v) = f.forecast_mw.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(OpfError::Fleet(format!("forecast {v} must be finite and >= 0")));
        }
        let mut sorted = f.buses.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(OpfError::Fleet("duplicate wind bus".into()));
        }
        Ok(f)
    }

    pub fn len(&self) -> usize {
        self.buses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buses.is_empty()
    }

    /// Positions of the wind buses in `network.buses`.
    pub fn bus_indices(&self, network: &Network) -> Result<Vec<usize>> {
        self.buses
            .iter()
            .map(|&id| {
                network
                    .bus_index(id)
                    .ok_or_else(|| OpfError::Fleet(format!("wind bus {id} not in network")))
            })
            .collect()
    }

    pub fn total_forecast_mw(&self) -> f64 {
        self.forecast_mw.iter().sum()
    }
}
