//! Command bodies shared by the binary and the tests. Each writes its
//! artifacts and a manifest into an output directory.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use wdrcc_conic::Status;
use wdrcc_opf::Dispatch;
use wdrcc_stochastics::{binomial_std_error, summarize, Summary};

use crate::apxbd::{apxbd_rows, apxbd_table, ApxBdOptions, ApxBdRow};
use crate::error::{CliError, Result};
use crate::manifest::{emit_table, num, read_text, write_text, RunManifest, Table};
use crate::study::{Formulation, Study, StudyConfig};
use crate::trace::{trace_tables, TraceOptions};

pub const DISPATCH_SCHEMA: &str = "wdrcc.dispatch/1";
pub const OOS_SCHEMA: &str = "wdrcc.oos/1";
pub const COMPARE_SCHEMA: &str = "wdrcc.oos_compare/1";
pub const TREND_SCHEMA: &str = "wdrcc.trend/1";

/// Two-sided normal quantile for the per-seed binomial intervals.
const Z_95: f64 = 1.959_963_984_540_054;

pub fn run_trace(opts: &TraceOptions, out: &Path) -> Result<(Table, Table, RunManifest)> {
    let mut m = RunManifest::new("trace", opts, None)?;
    let start = Instant::now();
    let (grid, curve) = trace_tables(opts)?;
    m.time("compute", start);
    emit_table(out, "trace_grid.csv", &grid, &mut m)?;
    emit_table(out, "trace_curve.csv", &curve, &mut m)?;
    m.write(out)?;
    Ok((grid, curve, m))
}

pub fn run_apxbd(opts: &ApxBdOptions, out: &Path) -> Result<(Vec<ApxBdRow>, RunManifest)> {
    let mut m = RunManifest::new("apxbd", opts, None)?;
    let start = Instant::now();
    let rows = apxbd_rows(opts)?;
    m.time("compute", start);
    emit_table(out, "apxbd.csv", &apxbd_table(&rows), &mut m)?;
    m.write(out)?;
    Ok((rows, m))
}

/// The JSON artifact of `solve-opf`: the dispatch plus what produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchArtifact {
    pub schema: String,
    pub manifest: String,
    pub formulation: Formulation,
    pub seed: u64,
    pub config: StudyConfig,
    pub dispatch: Dispatch,
}

impl DispatchArtifact {
    pub fn load(path: &Path) -> Result<Self> {
        let a: Self = serde_json::from_str(&read_text(path)?)?;
        if a.schema != DISPATCH_SCHEMA {
            return Err(CliError::Invalid(format!(
                "{}: schema {} is not {DISPATCH_SCHEMA}",
                path.display(),
                a.schema
            )));
        }
        Ok(a)
    }
}

/// Solves one study and writes `dispatch.json`. A non-optimal status is
/// still written; the caller decides on the exit code.
pub fn run_solve(
    config: &StudyConfig,
    seed: u64,
    formulation: Formulation,
    out: &Path,
) -> Result<(DispatchArtifact, RunManifest)> {
    let mut m = RunManifest::new("solve-opf", config, Some(seed))?;
    let start = Instant::now();
    let study = Study::new(config.clone())?;
    m.time("load", start);
    let solved = study.solve(seed, formulation)?;
    m.timings.insert("sample".into(), solved.sample_seconds);
    m.timings.insert("assemble".into(), solved.assemble_seconds);
    m.timings.insert("solve".into(), solved.solve_seconds);
    m.time("total", start);
    let artifact = DispatchArtifact {
        schema: DISPATCH_SCHEMA.into(),
        manifest: m.file_name(),
        formulation,
        seed,
        config: config.clone(),
        dispatch: solved.dispatch,
    };
    write_text(&out.join("dispatch.json"), &serde_json::to_string_pretty(&artifact)?)?;
    m.outputs.push("dispatch.json".into());
    m.write(out)?;
    Ok((artifact, m))
}

/// A success frequency with its binomial 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OosEstimate {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl OosEstimate {
    pub fn binomial(value: f64, samples: usize) -> Self {
        let half = Z_95 * binomial_std_error(value, samples);
        Self {
            value,
            ci_low: (value - half).max(0.0),
            ci_high: (value + half).min(1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OosReport {
    pub samples: usize,
    pub per_seed: Vec<(u64, OosEstimate)>,
    /// Mean over seeds with a Student-t interval.
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OosOptions {
    pub seeds: Vec<u64>,
    pub samples: usize,
}

fn check_seeds(seeds: &[u64]) -> Result<()> {
    if seeds.is_empty() {
        return Err(CliError::Invalid("at least one seed is required".into()));
    }
    Ok(())
}

/// Out-of-sample reliability of one fixed dispatch on fresh draws per seed.
pub fn oos_report(study: &Study, dispatch: &Dispatch, opts: &OosOptions) -> Result<OosReport> {
    check_seeds(&opts.seeds)?;
    let per_seed = opts
        .seeds
        .iter()
        .map(|&s| Ok((s, OosEstimate::binomial(study.oos(dispatch, s, opts.samples)?, opts.samples))))
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = per_seed.iter().map(|(_, e)| e.value).collect();
    Ok(OosReport {
        samples: opts.samples,
        per_seed,
        summary: summarize(&values),
    })
}

pub fn oos_table(r: &OosReport) -> Table {
    let mut t = Table::new(OOS_SCHEMA, &["row", "seed", "samples", "oos", "ci_low", "ci_high"]);
    for (seed, e) in &r.per_seed {
        t.push(vec![
            "seed".into(),
            seed.to_string(),
            r.samples.to_string(),
            num(e.value),
            num(e.ci_low),
            num(e.ci_high),
        ]);
    }
    t.push(vec![
        "mean".into(),
        String::new(),
        r.samples.to_string(),
        num(r.summary.mean),
        num(r.summary.ci_low),
        num(r.summary.ci_high),
    ]);
    t
}

/// `oos` on a dispatch artifact. The truth model comes from `config` when
/// given, otherwise from the artifact.
pub fn run_oos(
    artifact: &DispatchArtifact,
    config: Option<&StudyConfig>,
    opts: &OosOptions,
    out: &Path,
) -> Result<(OosReport, RunManifest)> {
    let mut study_cfg = artifact.config.clone();
    if let Some(c) = config {
        study_cfg.truth = c.truth.clone();
    }
    #[derive(Serialize)]
    struct Snapshot<'a> {
        study: &'a StudyConfig,
        options: &'a OosOptions,
        dispatch_manifest: &'a str,
    }
    let mut m = RunManifest::new(
        "oos",
        &Snapshot {
            study: &study_cfg,
            options: opts,
            dispatch_manifest: &artifact.manifest,
        },
        None,
    )?;
    let start = Instant::now();
    let study = Study::new(study_cfg)?;
    let report = oos_report(&study, &artifact.dispatch, opts)?;
    m.time("evaluate", start);
    emit_table(out, "oos.csv", &oos_table(&report), &mut m)?;
    m.write(out)?;
    Ok((report, m))
}

/// One seed of the robust-versus-Gaussian comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSeed {
    pub seed: u64,
    pub robust: Outcome,
    pub gaussian: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub status: Status,
    pub cost: f64,
    /// `None` unless the solve was optimal.
    pub oos: Option<OosEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub samples: usize,
    pub seeds: Vec<PairedSeed>,
    /// Over the seeds whose solve was optimal; `None` if there are none.
    pub robust_summary: Option<Summary>,
    pub gaussian_summary: Option<Summary>,
}

fn outcome(study: &Study, seed: u64, f: Formulation, samples: usize) -> Result<Outcome> {
    let solved = study.solve(seed, f)?;
    let d = &solved.dispatch;
    let oos = if d.status == Status::Optimal {
        Some(OosEstimate::binomial(study.oos(d, seed, samples)?, samples))
    } else {
        None
    };
    Ok(Outcome {
        status: d.status,
        cost: d.objective,
        oos,
    })
}

fn summary_of<'a>(it: impl Iterator<Item = &'a Outcome>) -> Option<Summary> {
    let v: Vec<f64> = it.filter_map(|o| o.oos.map(|e| e.value)).collect();
    (!v.is_empty()).then(|| summarize(&v))
}

/// For each seed: train once, solve both formulations on the same moments
/// source, evaluate both on the same test draws.
pub fn compare(study: &Study, opts: &OosOptions) -> Result<CompareReport> {
    check_seeds(&opts.seeds)?;
    let seeds = opts
        .seeds
        .par_iter()
        .map(|&seed| {
            Ok(PairedSeed {
                seed,
                robust: outcome(study, seed, Formulation::Robust, opts.samples)?,
                gaussian: outcome(study, seed, Formulation::Gaussian, opts.samples)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CompareReport {
        samples: opts.samples,
        robust_summary: summary_of(seeds.iter().map(|s| &s.robust)),
        gaussian_summary: summary_of(seeds.iter().map(|s| &s.gaussian)),
        seeds,
    })
}

fn status_name(s: Status) -> String {
    serde_json::to_value(s)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_else(|| format!("{s:?}"))
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn compare_table(r: &CompareReport) -> Table {
    let mut t = Table::new(
        COMPARE_SCHEMA,
        &[
            "row",
            "seed",
            "samples",
            "oos_2drc",
            "oos_cc",
            "cost_2drc",
            "cost_cc",
            "status_2drc",
            "status_cc",
            "oos_2drc_ci_low",
            "oos_2drc_ci_high",
            "oos_cc_ci_low",
            "oos_cc_ci_high",
        ],
    );
    for s in &r.seeds {
        let (a, b) = (s.robust.oos, s.gaussian.oos);
        t.push(vec![
            "seed".into(),
            s.seed.to_string(),
            r.samples.to_string(),
            opt_num(a.map(|e| e.value)),
            opt_num(b.map(|e| e.value)),
            num(s.robust.cost),
            num(s.gaussian.cost),
            status_name(s.robust.status),
            status_name(s.gaussian.status),
            opt_num(a.map(|e| e.ci_low)),
            opt_num(a.map(|e| e.ci_high)),
            opt_num(b.map(|e| e.ci_low)),
            opt_num(b.map(|e| e.ci_high)),
        ]);
    }
    let mean = |f: fn(&PairedSeed) -> f64| r.seeds.iter().map(f).sum::<f64>() / r.seeds.len() as f64;
    let (a, b) = (r.robust_summary, r.gaussian_summary);
    t.push(vec![
        "mean".into(),
        String::new(),
        r.samples.to_string(),
        opt_num(a.map(|s| s.mean)),
        opt_num(b.map(|s| s.mean)),
        num(mean(|s| s.robust.cost)),
        num(mean(|s| s.gaussian.cost)),
        String::new(),
        String::new(),
        opt_num(a.map(|s| s.ci_low)),
        opt_num(a.map(|s| s.ci_high)),
        opt_num(b.map(|s| s.ci_low)),
        opt_num(b.map(|s| s.ci_high)),
    ]);
    t
}

pub fn run_compare(config: &StudyConfig, opts: &OosOptions, out: &Path) -> Result<(CompareReport, RunManifest)> {
    #[derive(Serialize)]
    struct Snapshot<'a> {
        study: &'a StudyConfig,
        options: &'a OosOptions,
    }
    let mut m = RunManifest::new("oos-compare", &Snapshot { study: config, options: opts }, None)?;
    let start = Instant::now();
    let study = Study::new(config.clone())?;
    let report = compare(&study, opts)?;
    m.time("total", start);
    emit_table(out, "oos_compare.csv", &compare_table(&report), &mut m)?;
    m.write(out)?;
    Ok((report, m))
}

/// Cost and reliability for a sweep over the piece count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub pieces: usize,
    pub outcome: Outcome,
}

/// Trains once on `seed` and solves for every piece count on the same
/// moments; all dispatches are evaluated on the same test draws.
pub fn pieces_trend(study: &Study, pieces: &[usize], seed: u64, samples: usize) -> Result<Vec<TrendRow>> {
    let moments = study.train(seed)?;
    let test = study.test_samples(seed, samples)?;
    pieces
        .par_iter()
        .map(|&n| {
            let opf = wdrcc_opf::OpfConfig {
                pieces: n,
                ..study.config.opf.clone()
            };
            let (d, _, _) = study.solve_with(&opf, &moments)?;
            let oos = if d.status == Status::Optimal {
                let f = wdrcc_stochastics::oos_violation(
                    &d,
                    &study.network,
                    &study.operators,
                    &study.fleet,
                    &test,
                )?;
                Some(OosEstimate::binomial(f, samples))
            } else {
                None
            };
            Ok(TrendRow {
                pieces: n,
                outcome: Outcome {
                    status: d.status,
                    cost: d.objective,
                    oos,
                },
            })
        })
        .collect()
}

pub fn trend_table(rows: &[TrendRow], samples: usize) -> Table {
    let mut t = Table::new(
        TREND_SCHEMA,
        &["pieces", "status", "cost", "samples", "oos", "ci_low", "ci_high"],
    );
    for r in rows {
        let o = &r.outcome;
        t.push(vec![
            r.pieces.to_string(),
            status_name(o.status),
            num(o.cost),
            samples.to_string(),
            opt_num(o.oos.map(|e| e.value)),
            opt_num(o.oos.map(|e| e.ci_low)),
            opt_num(o.oos.map(|e| e.ci_high)),
        ]);
    }
    t
}

pub fn run_trend(
    config: &StudyConfig,
    pieces: &[usize],
    seed: u64,
    samples: usize,
    out: &Path,
) -> Result<(Vec<TrendRow>, RunManifest)> {
    #[derive(Serialize)]
    struct Snapshot<'a> {
        study: &'a StudyConfig,
        pieces: &'a [usize],
        samples: usize,
    }
    let mut m = RunManifest::new(
        "trend",
        &Snapshot {
            study: config,
            pieces,
            samples,
        },
        Some(seed),
    )?;
    let start = Instant::now();
    let study = Study::new(config.clone())?;
    let rows = pieces_trend(&study, pieces, seed, samples)?;
    m.time("total", start);
    emit_table(out, "trend.csv", &trend_table(&rows, samples), &mut m)?;
    m.write(out)?;
    Ok((rows, m))
}
