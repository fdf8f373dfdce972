use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wdrcc_cli::apxbd::ApxBdOptions;
use wdrcc_cli::commands::{
    run_apxbd, run_compare, run_oos, run_solve, run_trend, DispatchArtifact, OosOptions,
};
use wdrcc_cli::trace::TraceOptions;
use wdrcc_cli::{status_exit_code, CliError, Formulation, Result, StudyConfig};

/// Wasserstein-robust two-sided chance constraints: level sets, bounds and
/// robust DC dispatch.
#[derive(Debug, Parser)]
#[command(name = "wdrcc", version)]
struct Cli {
    /// Directory for artifacts and the run manifest.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Grid of g and points on the level curves g = delta.
    Trace {
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// One curve per radius.
        #[arg(long, value_delimiter = ',', default_value = "0.02,0.05,0.08")]
        delta: Vec<f64>,
        /// Polyline vertices emitted with each curve.
        #[arg(long, default_value_t = 7)]
        pieces: usize,
        /// Grid points per axis.
        #[arg(long, default_value_t = 101)]
        resolution: usize,
        /// Curve samples on each side of the symmetric point.
        #[arg(long, default_value_t = 24)]
        curve_points: usize,
        /// Grid half-width; derived from the widest curve when absent.
        #[arg(long)]
        extent: Option<f64>,
    },
    /// Approximation-bound table.
    Apxbd {
        #[arg(long, value_delimiter = ',', default_value = "0.01,0.05")]
        epsilon: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.01,0.05,0.1")]
        delta: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "3,5,9,19,29")]
        pieces: Vec<usize>,
    },
    /// Train on seeded draws and solve the robust dispatch.
    SolveOpf {
        #[command(flatten)]
        study: StudyArgs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Solve the Gaussian chance-constrained baseline instead.
        #[arg(long)]
        cc: bool,
    },
    /// Out-of-sample reliability of a dispatch, or of the robust and
    /// Gaussian dispatches side by side with --compare.
    Oos {
        /// Dispatch written by solve-opf.
        #[arg(long, required_unless_present = "compare")]
        dispatch: Option<PathBuf>,
        /// Re-train and solve both formulations for every seed.
        #[arg(long, conflicts_with = "dispatch")]
        compare: bool,
        #[command(flatten)]
        study: StudyArgs,
        #[arg(long, alias = "seeds", value_delimiter = ',', default_value = "1,2,3,4,5")]
        seed: Vec<u64>,
        /// Test draws per seed; the config's `oos_samples` when absent.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Cost and reliability over piece counts on one trained instance.
    Trend {
        #[command(flatten)]
        study: StudyArgs,
        #[arg(long = "pieces-list", value_delimiter = ',', default_value = "3,5,7,9")]
        pieces_list: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Test draws; the config's `oos_samples` when absent.
        #[arg(long)]
        samples: Option<usize>,
    },
}

/// Study selection and the overrides shared by the dispatch commands.
#[derive(Debug, Args)]
struct StudyArgs {
    /// Study JSON; the built-in 118-bus Weibull study when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Bundled case name or MATPOWER file.
    #[arg(long)]
    case: Option<String>,
    /// Risk level for both generator and branch bands.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    pieces: Option<usize>,
    /// Training sample count.
    #[arg(long)]
    training: Option<usize>,
}

impl StudyArgs {
    fn resolve(&self) -> Result<StudyConfig> {
        let mut c = match &self.config {
            Some(p) => StudyConfig::load(p)?,
            None => StudyConfig::case118_weibull(),
        };
        if let Some(case) = &self.case {
            c.case = case.clone();
        }
        if let Some(e) = self.epsilon {
            c.opf.eps_g = e;
            c.opf.eps_b = e;
        }
        if let Some(d) = self.delta {
            c.opf.delta = d;
        }
        if let Some(n) = self.pieces {
            c.opf.pieces = n;
        }
        if let Some(m) = self.training {
            c.opf.training_samples = m;
        }
        c.validate()?;
        Ok(c)
    }

    fn given(&self) -> bool {
        self.config.is_some()
            || self.case.is_some()
            || self.epsilon.is_some()
            || self.delta.is_some()
            || self.pieces.is_some()
            || self.training.is_some()
    }
}

fn run(cli: Cli) -> Result<i32> {
    let out = &cli.out;
    match cli.command {
        Command::Trace {
            epsilon,
            delta,
            pieces,
            resolution,
            curve_points,
            extent,
        } => {
            let opts = TraceOptions {
                epsilon,
                deltas: delta,
                pieces,
                resolution,
                curve_points,
                extent,
            };
            wdrcc_cli::commands::run_trace(&opts, out)?;
        }
        Command::Apxbd {
            epsilon,
            delta,
            pieces,
        } => {
            let opts = ApxBdOptions {
                epsilons: epsilon,
                deltas: delta,
                pieces,
            };
            let (rows, _) = run_apxbd(&opts, out)?;
            for r in rows {
                println!("{:<6} {:<6} {:>3}  {:.3}", r.epsilon, r.delta, r.pieces, r.bound);
            }
        }
        Command::SolveOpf { study, seed, cc } => {
            let config = study.resolve()?;
            let f = if cc { Formulation::Gaussian } else { Formulation::Robust };
            let (a, m) = run_solve(&config, seed, f, out)?;
            let d = &a.dispatch;
            println!(
                "status {:?}  cost {:.4}  iterations {}  total {:.2}s",
                d.status,
                d.objective,
                d.iterations,
                m.timings.get("total").copied().unwrap_or_default()
            );
            let code = status_exit_code(d.status);
            if code != 0 {
                eprintln!("solver status {:?}, residuals {:?}", d.status, d.kkt_residuals);
            }
            return Ok(code);
        }
        Command::Oos {
            dispatch,
            compare,
            study,
            seed,
            samples,
        } => {
            if compare {
                let config = study.resolve()?;
                let opts = OosOptions {
                    samples: samples.unwrap_or(config.oos_samples),
                    seeds: seed,
                };
                let (r, _) = run_compare(&config, &opts, out)?;
                for s in &r.seeds {
                    let show = |o: &wdrcc_cli::commands::Outcome| {
                        o.oos.map_or(format!("{:?}", o.status), |e| format!("{:.4}", e.value))
                    };
                    println!("seed {:>3}  2drc {}  cc {}", s.seed, show(&s.robust), show(&s.gaussian));
                }
                let show = |s: Option<wdrcc_stochastics::Summary>| s.map_or("-".into(), |s| format!("{:.4}", s.mean));
                println!("mean      2drc {}  cc {}", show(r.robust_summary), show(r.gaussian_summary));
            } else {
                let path = dispatch.expect("clap requires --dispatch without --compare");
                let artifact = DispatchArtifact::load(&path)?;
                let config = if study.given() { Some(study.resolve()?) } else { None };
                let opts = OosOptions {
                    samples: samples.unwrap_or(artifact.config.oos_samples),
                    seeds: seed,
                };
                let (r, _) = run_oos(&artifact, config.as_ref(), &opts, out)?;
                for (s, e) in &r.per_seed {
                    println!("seed {s:>3}  {:.4}", e.value);
                }
                println!(
                    "mean      {:.4}  [{:.4}, {:.4}]",
                    r.summary.mean, r.summary.ci_low, r.summary.ci_high
                );
            }
        }
        Command::Trend {
            study,
            pieces_list,
            seed,
            samples,
        } => {
            let config = study.resolve()?;
            let n = samples.unwrap_or(config.oos_samples);
            let (rows, _) = run_trend(&config, &pieces_list, seed, n, out)?;
            for r in rows {
                println!(
                    "N {:>3}  cost {:.4}  oos {}",
                    r.pieces,
                    r.outcome.cost,
                    r.outcome.oos.map_or("-".into(), |e| format!("{:.4}", e.value))
                );
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(CliError::exit_code(&e) as u8)
        }
    }
}
