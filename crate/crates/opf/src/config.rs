use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use wdrcc_core::wdrcc::construct_points;
use wdrcc_core::{LevelPolyline, RiskSpec};
use wdrcc_grid::Network;

use crate::error::{OpfError, Result};

/// Identifies one chance-constrained row of the dispatch model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum ConstraintId {
    /// Position in `Network::generators`.
    Generator(usize),
    /// Position in `Network::branches`.
    Branch(usize),
}

/// Risk parameters replacing the defaults for one constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskOverride {
    pub constraint: ConstraintId,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
}

/// Branch rating adjustments applied before assembly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityOptions {
    /// Multiplier on every finite rating.
    #[serde(default = "one")]
    pub scale: f64,
    /// Rating (MW, before scaling) given to branches the case leaves
    /// unlimited. `None` skips their flow constraints.
    #[serde(default)]
    pub unrated_mw: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl Default for CapacityOptions {
    fn default() -> Self {
        Self {
            scale: 1.0,
            unrated_mw: None,
        }
    }
}

impl CapacityOptions {
    pub fn apply(&self, network: &mut Network) {
        if let Some(r) = self.unrated_mw {
            network.rate_unrated(r);
        }
        network.scale_capacities(self.scale);
    }
}

fn default_ridge() -> f64 {
    wdrcc_conic::covariance::DEFAULT_RIDGE
}

fn default_tol() -> f64 {
    1e-8
}

/// Everything that parameterizes the robust dispatch besides the network
/// and the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpfConfig {
    /// Risk level of the generator limit bands.
    pub eps_g: f64,
    /// Risk level of the branch flow bands.
    pub eps_b: f64,
    /// Wasserstein radius.
    pub delta: f64,
    /// Number of level-curve points, odd and at least 3.
    pub pieces: usize,
    /// Training sample count used to estimate the moments.
    pub training_samples: usize,
    #[serde(default)]
    pub overrides: Vec<RiskOverride>,
    #[serde(default)]
    pub capacity: CapacityOptions,
    /// Reference bus id; the first bus when absent.
    #[serde(default)]
    pub slack_bus: Option<i64>,
    /// Relative ridge for singular sample covariances.
    #[serde(default = "default_ridge")]
    pub ridge: f64,
    #[serde(default = "default_tol")]
    pub solver_tol: f64,
}

impl Default for OpfConfig {
    fn default() -> Self {
        Self {
            eps_g: 0.05,
            eps_b: 0.05,
            delta: 0.05,
            pieces: 7,
            training_samples: 100,
            overrides: Vec::new(),
            capacity: CapacityOptions::default(),
            slack_bus: None,
            ridge: default_ridge(),
            solver_tol: default_tol(),
        }
    }
}

fn check_eps(name: &str, eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(OpfError::Config(format!("{name} = {eps} must lie in (0, 1/2)")));
    }
    Ok(())
}

impl OpfConfig {
    pub fn validate(&self) -> Result<()> {
        check_eps("eps_g", self.eps_g)?;
        check_eps("eps_b", self.eps_b)?;
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(OpfError::Config(format!("delta = {} must be positive", self.delta)));
        }
        if self.pieces < 3 || self.pieces.is_multiple_of(2) {
            return Err(OpfError::Config(format!(
                "pieces = {} must be odd and at least 3",
                self.pieces
            )));
        }
        if self.training_samples < 2 {
            return Err(OpfError::Config("training_samples must be at least 2".into()));
        }
        if !(self.capacity.scale > 0.0) || self.capacity.unrated_mw.is_some_and(|r| !(r > 0.0)) {
            return Err(OpfError::Config("capacities must be positive".into()));
        }
        if !(self.ridge > 0.0) || !(self.solver_tol > 0.0) {
            return Err(OpfError::Config("ridge and solver_tol must be positive".into()));
        }
        for o in &self.overrides {
            if let Some(e) = o.epsilon {
                check_eps("override epsilon", e)?;
            }
            if o.delta.is_some_and(|d| !(d > 0.0)) {
                return Err(OpfError::Config("override delta must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `(epsilon, delta)` for one constraint after overrides.
    pub fn risk_for(&self, id: ConstraintId) -> (f64, f64) {
        let mut eps = match id {
            ConstraintId::Generator(_) => self.eps_g,
            ConstraintId::Branch(_) => self.eps_b,
        };
        let mut delta = self.delta;
        for o in self.overrides.iter().filter(|o| o.constraint == id) {
            eps = o.epsilon.unwrap_or(eps);
            delta = o.delta.unwrap_or(delta);
        }
        (eps, delta)
    }
}

/// Level polylines keyed by `(epsilon, delta)`, built once per distinct pair.
#[derive(Debug, Clone)]
pub struct Polylines {
    pieces: usize,
    cache: BTreeMap<(u64, u64), LevelPolyline>,
}

impl Polylines {
    pub fn new(pieces: usize) -> Self {
        Self {
            pieces,
            cache: BTreeMap::new(),
        }
    }

    /// Every polyline `config` can ask for.
    pub fn for_config(config: &OpfConfig) -> Result<Self> {
        config.validate()?;
        let mut p = Self::new(config.pieces);
        p.get(config.eps_g, config.delta)?;
        p.get(config.eps_b, config.delta)?;
        for o in &config.overrides {
            let (e, d) = config.risk_for(o.constraint);
            p.get(e, d)?;
        }
        Ok(p)
    }

    pub fn pieces(&self) -> usize {
        self.pieces
    }

    pub fn get(&mut self, epsilon: f64, delta: f64) -> Result<&LevelPolyline> {
        let key = (epsilon.to_bits(), delta.to_bits());
        if !self.cache.contains_key(&key) {
            let spec = RiskSpec::new(epsilon, delta)?;
            self.cache.insert(key, construct_points(&spec, self.pieces)?);
        }
        Ok(&self.cache[&key])
    }

    /// A polyline previously built by [`Polylines::get`].
    pub fn cached(&self, epsilon: f64, delta: f64) -> Option<&LevelPolyline> {
        self.cache.get(&(epsilon.to_bits(), delta.to_bits()))
    }
}
