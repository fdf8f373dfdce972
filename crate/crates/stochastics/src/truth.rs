//! Truth distributions of the forecast errors and seeded sampling.
//!
//! Every draw consumes exactly one 64-bit word from a ChaCha8 stream
//! dedicated to its bus (`set_stream(bus)`), so row `r` of bus `b` depends
//! only on `(seed, b, r)`. Blocks of rows can therefore be generated
//! independently (`sample_block`) and concatenated bit-identically.

use nalgebra::DMatrix;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use wdrcc_core::gaussian::std_quantile;

use crate::error::{Result, StochasticsError};

/// Marginal law of one bus's renewable output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Marginal {
    Weibull { shape: f64, scale: f64 },
    Gaussian { mean: f64, std: f64 },
}

impl Marginal {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Marginal::Weibull { shape, scale } => {
                shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite()
            }
            Marginal::Gaussian { mean, std } => mean.is_finite() && std > 0.0 && std.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(StochasticsError::InvalidModel(format!("{self:?}")))
        }
    }

    /// Analytic mean; `scale * Gamma(1 + 1/shape)` for Weibull.
    pub fn mean(&self) -> f64 {
        match *self {
            Marginal::Weibull { shape, scale } => scale * gamma(1.0 + 1.0 / shape),
            Marginal::Gaussian { mean, .. } => mean,
        }
    }

    pub fn std(&self) -> f64 {
        match *self {
            Marginal::Weibull { shape, scale } => {
                let g1 = gamma(1.0 + 1.0 / shape);
                scale * (gamma(1.0 + 2.0 / shape) - g1 * g1).sqrt()
            }
            Marginal::Gaussian { std, .. } => std,
        }
    }

    /// Inverse CDF at `u` in (0, 1).
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            // F^-1(1 - u); 1 - U is uniform as well.
            Marginal::Weibull { shape, scale } => scale * (-u.ln()).powf(1.0 / shape),
            Marginal::Gaussian { mean, std } => {
                mean + std * std_quantile(u).expect("u lies strictly inside (0, 1)")
            }
        }
    }
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

/// Per-bus forecast-error laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthModel {
    pub marginals: Vec<Marginal>,
    /// MW per distribution unit.
    #[serde(default = "one")]
    pub unit_mw: f64,
    /// Subtract the analytic mean so errors are zero-mean.
    #[serde(default = "yes")]
    pub centered: bool,
}

impl TruthModel {
    pub fn new(marginals: Vec<Marginal>, unit_mw: f64) -> Result<Self> {
        let m = Self {
            marginals,
            unit_mw,
            centered: true,
        };
        m.validate()?;
        Ok(m)
    }

    /// Weibull errors with a common scale, one shape per bus.
    pub fn weibull(shapes: &[f64], scale: f64, unit_mw: f64) -> Result<Self> {
        Self::new(
            shapes
                .iter()
                .map(|&shape| Marginal::Weibull { shape, scale })
                .collect(),
            unit_mw,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.unit_mw > 0.0 && self.unit_mw.is_finite()) {
            return Err(StochasticsError::InvalidModel(format!(
                "unit_mw = {} must be positive",
                self.unit_mw
            )));
        }
        self.marginals.iter().try_for_each(Marginal::validate)
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    /// Mean of the uncentered output, MW. A natural forecast.
    pub fn output_mean_mw(&self) -> Vec<f64> {
        self.marginals.iter().map(|m| m.mean() * self.unit_mw).collect()
    }

    fn offset(&self, m: &Marginal) -> f64 {
        if self.centered {
            m.mean()
        } else {
            0.0
        }
    }
}

/// Uniform on the open interval (0, 1): the midpoint of one of 2^52 cells,
/// all exactly representable.
fn open_unit(word: u64) -> f64 {
    ((word >> 12) as f64 + 0.5) / (1u64 << 52) as f64
}

/// `n` error draws in MW, one row per draw and one column per bus.
pub fn sample(model: &TruthModel, n: usize, seed: u64) -> Result<DMatrix<f64>> {
    sample_block(model, seed, 0, n)
}

/// Rows `start .. start + len` of the stream that [`sample`] draws from.
pub fn sample_block(model: &TruthModel, seed: u64, start: usize, len: usize) -> Result<DMatrix<f64>> {
    model.validate()?;
    if len == 0 {
        return Err(StochasticsError::InvalidModel("sample count must be at least 1".into()));
    }
    let mut out = DMatrix::zeros(len, model.dim());
    for (b, m) in model.marginals.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        // Two 32-bit words per draw.
        rng.set_word_pos(2 * start as u128);
        let shift = model.offset(m);
        for r in 0..len {
            out[(r, b)] = (m.quantile(open_unit(rng.next_u64())) - shift) * model.unit_mw;
        }
    }
    Ok(out)
}

/// A seed for an independent purpose (e.g. training vs evaluation) derived
/// from a run seed by splitmix64 mixing.
pub fn derive_seed(seed: u64, purpose: u64) -> u64 {
    let mut z = seed ^ purpose.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
