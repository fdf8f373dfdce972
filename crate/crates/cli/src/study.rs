//! A study ties a network, a wind fleet and a truth model together and runs
//! the pipeline: training draws -> moments -> dispatch -> out-of-sample.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use wdrcc_conic::Status;
use wdrcc_grid::{build_operators, cases, parse_case, DcOperators, Network};
use wdrcc_opf::{
    assemble, estimate_moments, solve_model, CapacityOptions, Dispatch, MomentEstimate, OpfConfig,
    Polylines, WindFleet,
};
use wdrcc_stochastics::{derive_seed, oos_violation, sample, TruthModel};

use crate::error::{CliError, Result};
use crate::manifest::read_text;

/// Radius standing in for "no robustness" in the Gaussian baseline.
pub const CC_DELTA: f64 = 1e-6;

/// `derive_seed` purposes.
pub const TRAIN_PURPOSE: u64 = 1;
pub const TEST_PURPOSE: u64 = 2;

fn default_oos_samples() -> usize {
    10_000
}

/// Everything a run needs besides the seed. Serialized as the `--config`
/// file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    /// A bundled case name (`case30`, `case39`, `case118`, ...) or a path to
    /// a MATPOWER file.
    pub case: String,
    pub wind_buses: Vec<i64>,
    pub truth: TruthModel,
    /// Scheduled wind output, MW; the truth model's mean output when absent.
    #[serde(default)]
    pub forecast_mw: Option<Vec<f64>>,
    #[serde(default)]
    pub opf: OpfConfig,
    #[serde(default = "default_oos_samples")]
    pub oos_samples: usize,
}

impl StudyConfig {
    /// Four wind farms on the 118-bus system with Weibull errors of shapes
    /// 1.2, 3.5, 0.5 and 4.0 (unit scale, 10 MW per unit). Branches without
    /// a rating get 200 MW.
    pub fn case118_weibull() -> Self {
        Self {
            case: "case118".into(),
            wind_buses: vec![2, 7, 43, 86],
            truth: TruthModel::weibull(&[1.2, 3.5, 0.5, 4.0], 1.0, 10.0).expect("valid shapes"),
            forecast_mw: None,
            opf: OpfConfig {
                capacity: CapacityOptions {
                    scale: 1.0,
                    unrated_mw: Some(200.0),
                },
                ..OpfConfig::default()
            },
            oos_samples: default_oos_samples(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read_text(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.opf.validate()?;
        self.truth.validate()?;
        if self.truth.dim() != self.wind_buses.len() {
            return Err(CliError::Invalid(format!(
                "{} truth marginals for {} wind buses",
                self.truth.dim(),
                self.wind_buses.len()
            )));
        }
        if let Some(f) = &self.forecast_mw {
            if f.len() != self.wind_buses.len() {
                return Err(CliError::Invalid(format!(
                    "{} forecasts for {} wind buses",
                    f.len(),
                    self.wind_buses.len()
                )));
            }
        }
        if self.oos_samples == 0 {
            return Err(CliError::Invalid("oos_samples must be positive".into()));
        }
        Ok(())
    }

    /// The Gaussian chance-constrained baseline: every radius set to
    /// [`CC_DELTA`].
    pub fn gaussian_baseline(&self) -> Self {
        let mut c = self.clone();
        c.opf.delta = CC_DELTA;
        for o in &mut c.opf.overrides {
            if o.delta.is_some() {
                o.delta = Some(CC_DELTA);
            }
        }
        c
    }
}

/// Reads a bundled case by name or a MATPOWER file by path.
pub fn load_case(case: &str) -> Result<Network> {
    if let Some(net) = cases::load_bundled(case) {
        return Ok(net?);
    }
    let path = Path::new(case);
    if path.exists() {
        return Ok(parse_case(&read_text(path)?)?);
    }
    Err(CliError::Invalid(format!(
        "{case:?} is neither a bundled case ({}) nor a readable file",
        cases::BUNDLED.join(", ")
    )))
}

/// Which formulation to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    /// The configured Wasserstein radius.
    Robust,
    /// The vanishing-radius Gaussian baseline.
    Gaussian,
}

/// A prepared study: network with adjusted capacities, its operators and
/// the fleet.
#[derive(Debug, Clone)]
pub struct Study {
    pub config: StudyConfig,
    pub network: Network,
    pub operators: DcOperators,
    pub fleet: WindFleet,
}

/// One solved dispatch with its stage timings.
#[derive(Debug, Clone)]
pub struct Solved {
    pub dispatch: Dispatch,
    pub moments: MomentEstimate,
    pub sample_seconds: f64,
    pub assemble_seconds: f64,
    pub solve_seconds: f64,
}

impl Study {
    pub fn new(config: StudyConfig) -> Result<Self> {
        config.validate()?;
        let mut network = load_case(&config.case)?;
        config.opf.capacity.apply(&mut network);
        let operators = build_operators(&network)?;
        let forecast = config
            .forecast_mw
            .clone()
            .unwrap_or_else(|| config.truth.output_mean_mw());
        let fleet = WindFleet::new(config.wind_buses.clone(), forecast)?;
        fleet.bus_indices(&network)?;
        Ok(Self {
            config,
            network,
            operators,
            fleet,
        })
    }

    /// Training errors, one row per draw.
    pub fn training_samples(&self, seed: u64, count: usize) -> Result<nalgebra::DMatrix<f64>> {
        Ok(sample(&self.config.truth, count, derive_seed(seed, TRAIN_PURPOSE))?)
    }

    pub fn test_samples(&self, seed: u64, count: usize) -> Result<nalgebra::DMatrix<f64>> {
        Ok(sample(&self.config.truth, count, derive_seed(seed, TEST_PURPOSE))?)
    }

    pub fn train(&self, seed: u64) -> Result<MomentEstimate> {
        let s = self.training_samples(seed, self.config.opf.training_samples)?;
        Ok(estimate_moments(&s, self.config.opf.ridge)?)
    }

    /// Solves with given moments; also returns the assembly and solve wall
    /// times. A non-optimal status is returned inside the dispatch, not as
    /// an error.
    pub fn solve_with(&self, opf: &OpfConfig, moments: &MomentEstimate) -> Result<(Dispatch, f64, f64)> {
        let start = Instant::now();
        let polys = Polylines::for_config(opf)?;
        let model = assemble(&self.network, &self.operators, &self.fleet, moments, opf, &polys)?;
        let assemble_seconds = start.elapsed().as_secs_f64();
        let start = Instant::now();
        let (_, dispatch) = solve_model(&model, opf.solver_tol)?;
        Ok((dispatch, assemble_seconds, start.elapsed().as_secs_f64()))
    }

    /// Trains on the seed's training draws and solves `formulation`.
    pub fn solve(&self, seed: u64, formulation: Formulation) -> Result<Solved> {
        let start = Instant::now();
        let moments = self.train(seed)?;
        let sample_seconds = start.elapsed().as_secs_f64();
        let opf = match formulation {
            Formulation::Robust => self.config.opf.clone(),
            Formulation::Gaussian => self.config.gaussian_baseline().opf,
        };
        let (dispatch, assemble_seconds, solve_seconds) = self.solve_with(&opf, &moments)?;
        Ok(Solved {
            dispatch,
            moments,
            sample_seconds,
            assemble_seconds,
            solve_seconds,
        })
    }

    /// Joint success frequency of `dispatch` on the seed's test draws.
    pub fn oos(&self, dispatch: &Dispatch, seed: u64, count: usize) -> Result<f64> {
        let test = self.test_samples(seed, count)?;
        Ok(oos_violation(dispatch, &self.network, &self.operators, &self.fleet, &test)?)
    }
}

/// Turns a non-optimal dispatch into the matching error.
pub fn require_optimal(d: &Dispatch) -> Result<()> {
    if d.status == Status::Optimal {
        Ok(())
    } else {
        Err(CliError::NotOptimal {
            status: d.status,
            residuals: d.kkt_residuals,
        })
    }
}
