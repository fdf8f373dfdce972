use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use wdrcc_cli::apxbd::{apxbd_rows, ApxBdOptions, SCHEMA as APXBD_SCHEMA};
use wdrcc_cli::commands::*;
use wdrcc_cli::trace::{TraceOptions, CURVE_SCHEMA, GRID_SCHEMA};
use wdrcc_cli::{Formulation, RunManifest, Study, StudyConfig, Table};
use wdrcc_conic::Status;
use wdrcc_core::wdrcc::eval_g;
use wdrcc_core::{Band, RiskSpec};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wdrcc"))
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn read_table(schema: &'static str, path: &Path) -> (Table, String) {
    Table::from_csv(schema, &std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Same header and row labels, numeric fields equal to `tol` relative.
fn assert_tables_match(got: &Table, want: &Table, tol: f64) {
    assert_eq!(got.header, want.header);
    assert_eq!(got.rows.len(), want.rows.len());
    for (g, w) in got.rows.iter().zip(&want.rows) {
        for (a, b) in g.iter().zip(w) {
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(y)) => assert!((x - y).abs() <= tol * y.abs().max(1.0), "{a} vs {b}"),
                _ => assert_eq!(a, b),
            }
        }
    }
}

#[test]
fn golden_apxbd_table() {
    let dir = tempfile::tempdir().unwrap();
    let opts = ApxBdOptions {
        epsilons: vec![0.01, 0.05],
        deltas: vec![0.05],
        pieces: vec![3, 5],
    };
    run_apxbd(&opts, dir.path()).unwrap();
    let (got, manifest) = read_table(APXBD_SCHEMA, &dir.path().join("apxbd.csv"));
    let (want, _) = Table::from_csv(APXBD_SCHEMA, &golden("apxbd.csv")).unwrap();
    assert_tables_match(&got, &want, 1e-9);
    let m = RunManifest::read(&dir.path().join(&manifest)).unwrap();
    assert_eq!(m.command, "apxbd");
    assert_eq!(m.outputs, vec!["apxbd.csv"]);
}

#[test]
fn golden_trace_tables() {
    let dir = tempfile::tempdir().unwrap();
    let opts = TraceOptions {
        epsilon: 0.1,
        deltas: vec![0.05],
        pieces: 3,
        resolution: 3,
        curve_points: 3,
        extent: None,
    };
    run_trace(&opts, dir.path()).unwrap();
    for (schema, file) in [(CURVE_SCHEMA, "trace_curve.csv"), (GRID_SCHEMA, "trace_grid.csv")] {
        let (got, m) = read_table(schema, &dir.path().join(file));
        let (want, _) = Table::from_csv(schema, &golden(file)).unwrap();
        assert_tables_match(&got, &want, 1e-9);
        assert_eq!(m, "trace.manifest.json");
    }
}

#[test]
fn trace_curves_on_level_and_nested() {
    let dir = tempfile::tempdir().unwrap();
    let opts = TraceOptions {
        epsilon: 0.1,
        deltas: vec![0.02, 0.05, 0.08],
        resolution: 5,
        ..TraceOptions::default()
    };
    let (_, curve, _) = run_trace(&opts, dir.path()).unwrap();
    let col = |n| curve.column(n).unwrap();
    let f = |r: &Vec<String>, n| r[col(n)].parse::<f64>().unwrap();
    let points = |delta: f64| -> Vec<(Band, String)> {
        curve
            .rows
            .iter()
            .filter(|r| f(r, "delta") == delta)
            .map(|r| (Band::new(f(r, "ell"), f(r, "u")), r[col("kind")].clone()))
            .collect()
    };
    for r in &curve.rows {
        assert!(f(r, "ell") < 0.0 && 0.0 < f(r, "u"));
    }
    // The symmetric point (-u0, u0) at delta = 0.05.
    let sym: Vec<_> = curve
        .rows
        .iter()
        .filter(|r| f(r, "delta") == 0.05 && r[col("kind")] == "symmetric")
        .collect();
    assert_eq!(sym.len(), 1);
    assert!(f(sym[0], "residual").abs() <= 1e-10);
    assert_eq!(f(sym[0], "ell"), -f(sym[0], "u"));
    assert!(curve.rows.iter().all(|r| f(r, "residual").abs() <= 1e-10));

    // Larger radii carve out smaller regions: every point on the 0.08 curve
    // is strictly inside the 0.02 region, and never the other way round.
    let loose = RiskSpec::new(0.1, 0.02).unwrap();
    for (b, _) in points(0.08) {
        assert!(eval_g(&loose, b).unwrap() > 0.02);
    }
    let tight = RiskSpec::new(0.1, 0.08).unwrap();
    for (b, _) in points(0.02) {
        assert!(eval_g(&tight, b).unwrap() < 0.08);
    }
    assert_eq!(
        points(0.05).iter().filter(|(_, k)| k == "vertex").count(),
        opts.pieces
    );
}

#[test]
fn apxbd_orderings() {
    let rows = apxbd_rows(&ApxBdOptions::default()).unwrap();
    assert_eq!(rows.len(), 30);
    let spot = rows.iter().find(|r| (r.epsilon, r.delta, r.pieces) == (0.05, 0.01, 3)).unwrap();
    assert!((spot.bound - 1.537).abs() <= 0.02, "{spot:?}");
    for r in &rows {
        for s in &rows {
            let same_block = r.epsilon == s.epsilon && r.delta == s.delta;
            if same_block && s.pieces > r.pieces {
                assert!(s.bound <= r.bound + 1e-9, "N: {r:?} {s:?}");
            }
            if r.epsilon == s.epsilon && r.pieces == s.pieces && s.delta > r.delta {
                assert!(s.bound <= r.bound + 1e-9, "delta: {r:?} {s:?}");
            }
        }
    }
}

#[test]
fn solve_opf_binary_case30() {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let status = bin()
        .args(["--out", dir.path().to_str().unwrap(), "solve-opf", "--seed", "3", "--config"])
        .arg(config_path("case30.json"))
        .output()
        .unwrap()
        .status;
    let elapsed = start.elapsed().as_secs_f64();
    assert_eq!(status.code(), Some(0));
    assert!(elapsed < 5.0, "{elapsed} s");
    let a = DispatchArtifact::load(&dir.path().join("dispatch.json")).unwrap();
    assert_eq!(a.dispatch.status, Status::Optimal);
    assert_eq!(a.seed, 3);
    assert_eq!(a.config.case, "case30");
    let m = RunManifest::read(&dir.path().join(&a.manifest)).unwrap();
    assert_eq!(m.outputs, vec!["dispatch.json"]);
    assert_eq!(m.seed, Some(3));
    for stage in ["sample", "assemble", "solve", "total"] {
        assert!(m.timings.contains_key(stage), "{stage}");
    }

    // And the dispatch can be evaluated from the file.
    let out = bin()
        .args(["--out", dir.path().to_str().unwrap(), "oos", "--seed", "1,2,3", "--samples", "2000", "--dispatch"])
        .arg(dir.path().join("dispatch.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (t, _) = read_table(OOS_SCHEMA, &dir.path().join("oos.csv"));
    assert_eq!(t.rows.len(), 4);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // Branch ratings scaled far below the load.
    let mut c = StudyConfig::load(&config_path("case30.json")).unwrap();
    c.opf.capacity.scale = 0.01;
    let cfg = dir.path().join("tight.json");
    std::fs::write(&cfg, c.to_json().unwrap()).unwrap();
    let out = bin()
        .args(["--out", dir.path().to_str().unwrap(), "solve-opf", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // The non-optimal dispatch is still written, with its residuals.
    let a = DispatchArtifact::load(&dir.path().join("dispatch.json")).unwrap();
    assert!(matches!(a.dispatch.status, Status::Infeasible | Status::Unbounded));

    let out = bin()
        .args(["--out", dir.path().to_str().unwrap(), "solve-opf", "--case", "case_missing"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin()
        .args(["--out", dir.path().to_str().unwrap(), "solve-opf", "--pieces", "4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(wdrcc_cli::status_exit_code(Status::MaxIter), 3);
}

#[test]
fn infeasible_toy_reports_status() {
    // Generation capacity below the load.
    let mut study = Study::new(StudyConfig::load(&config_path("case30.json")).unwrap()).unwrap();
    for g in &mut study.network.generators {
        g.pmax_mw = 1.0;
    }
    for f in [Formulation::Robust, Formulation::Gaussian] {
        let s = study.solve(1, f).unwrap();
        assert!(matches!(s.dispatch.status, Status::Infeasible | Status::Unbounded));
        let err = wdrcc_cli::study::require_optimal(&s.dispatch).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}

#[test]
fn runs_are_deterministic() {
    let c = StudyConfig::load(&config_path("case39.json")).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let start = Instant::now();
    run_solve(&c, 9, Formulation::Robust, a.path()).unwrap();
    assert!(start.elapsed().as_secs_f64() < 5.0);
    run_solve(&c, 9, Formulation::Robust, b.path()).unwrap();
    let read = |d: &Path| std::fs::read_to_string(d.join("dispatch.json")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));

    let opts = OosOptions {
        seeds: vec![4, 5],
        samples: 3000,
    };
    let art = DispatchArtifact::load(&a.path().join("dispatch.json")).unwrap();
    run_oos(&art, None, &opts, a.path()).unwrap();
    run_oos(&art, None, &opts, b.path()).unwrap();
    let read = |d: &Path| std::fs::read_to_string(d.join("oos.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn oos_shape_and_interval_scaling() {
    let c = StudyConfig::load(&config_path("case39.json")).unwrap();
    let study = Study::new(c).unwrap();
    let d = study.solve(1, Formulation::Gaussian).unwrap().dispatch;
    let seeds: Vec<u64> = (1..=5).collect();
    let small = oos_report(&study, &d, &OosOptions { seeds: seeds.clone(), samples: 1000 }).unwrap();
    let large = oos_report(&study, &d, &OosOptions { seeds, samples: 10_000 }).unwrap();
    assert_eq!(oos_table(&small).rows.len(), 6);
    assert_eq!(oos_table(&small).rows[5][0], "mean");
    let width = |r: &OosReport| {
        r.per_seed.iter().map(|(_, e)| e.ci_high - e.ci_low).sum::<f64>() / r.per_seed.len() as f64
    };
    // ~1/sqrt(n): a tenfold sample shrinks the interval about 3.2 times.
    let ratio = width(&small) / width(&large);
    assert!((2.2..4.5).contains(&ratio), "{ratio}");
    assert!(large.summary.ci_high - large.summary.ci_low < small.summary.ci_high - small.summary.ci_low);
}

#[test]
fn compare_mode_pairs_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["--out", dir.path().to_str().unwrap(), "oos", "--compare", "--seed", "1,2", "--samples", "2000", "--config"])
        .arg(config_path("case39.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (t, m) = read_table(COMPARE_SCHEMA, &dir.path().join("oos_compare.csv"));
    for c in ["oos_2drc", "oos_cc", "cost_2drc", "cost_cc", "status_2drc", "status_cc"] {
        assert!(t.column(c).is_some(), "{c}");
    }
    assert_eq!(t.rows.len(), 3);
    let cost = |r: &Vec<String>, c| r[t.column(c).unwrap()].parse::<f64>().unwrap();
    for r in &t.rows[..2] {
        // The robust dispatch is never cheaper.
        assert!(cost(r, "cost_2drc") >= cost(r, "cost_cc") - 1e-6);
        assert_eq!(r[t.column("status_2drc").unwrap()], "optimal");
    }
    assert_eq!(m, "oos-compare.manifest.json");
    let manifest = RunManifest::read(&dir.path().join(m)).unwrap();
    assert_eq!(manifest.config["options"]["seeds"], serde_json::json!([1, 2]));
}

/// The sizing run on the case as shipped. With the 200 MW ratings of the
/// reliability study this radius (bands of about +-7 sigma) is infeasible.
#[test]
fn large_radius_case118_is_optimal() {
    let mut c = StudyConfig::case118_weibull();
    c.opf.capacity.unrated_mw = None;
    c.opf.pieces = 7;
    c.opf.training_samples = 1000;
    c.opf.eps_g = 0.1;
    c.opf.eps_b = 0.1;
    c.opf.delta = 0.5;
    let study = Study::new(c.clone()).unwrap();
    let s = study.solve(1, Formulation::Robust).unwrap();
    assert_eq!(s.dispatch.status, Status::Optimal);

    c.opf.capacity.unrated_mw = Some(200.0);
    let rated = Study::new(c).unwrap().solve(1, Formulation::Robust).unwrap();
    assert_eq!(rated.dispatch.status, Status::Infeasible);
}

#[test]
fn config_files_round_trip_and_validate() {
    for name in ["case30.json", "case39.json", "case118.json"] {
        let c = StudyConfig::load(&config_path(name)).unwrap();
        assert_eq!(StudyConfig::from_json(&c.to_json().unwrap()).unwrap(), c);
    }
    assert_eq!(
        StudyConfig::load(&config_path("case118.json")).unwrap(),
        StudyConfig::case118_weibull()
    );
    let mut c = StudyConfig::case118_weibull();
    c.wind_buses.pop();
    assert!(c.validate().is_err());
    let mut c = StudyConfig::case118_weibull();
    c.forecast_mw = Some(vec![1.0]);
    assert!(c.validate().is_err());
    let mut c = StudyConfig::case118_weibull();
    c.wind_buses[0] = 9999;
    assert!(Study::new(c).is_err());
    let g = StudyConfig::case118_weibull().gaussian_baseline();
    assert_eq!(g.opf.delta, wdrcc_cli::study::CC_DELTA);
}

#[test]
fn trend_rows_in_requested_order() {
    let dir = tempfile::tempdir().unwrap();
    let c = StudyConfig::load(&config_path("case39.json")).unwrap();
    let (rows, m) = run_trend(&c, &[9, 3, 5], 2, 2000, dir.path()).unwrap();
    assert_eq!(rows.iter().map(|r| r.pieces).collect::<Vec<_>>(), vec![9, 3, 5]);
    assert_eq!(m.outputs, vec!["trend.csv"]);
    let (t, _) = read_table(TREND_SCHEMA, &dir.path().join("trend.csv"));
    assert_eq!(t.rows.len(), 3);
}
