//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any
//! criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use wdrcc_cli::apxbd::{apxbd_rows, ApxBdOptions};
use wdrcc_cli::commands::{compare, pieces_trend, run_solve, OosOptions};
use wdrcc_cli::{Formulation, Study, StudyConfig};
use wdrcc_conic::regression::regression_suite;
use wdrcc_conic::{solve, AffineExpr, ConicProgram, Status};
use wdrcc_core::wdrcc::{
    chord_slope, construct_points, eval_g, eval_g_var_form, max_g_on_boundary, polyline_contains,
    solve_u_on_levelset,
};
use wdrcc_core::{Band, RiskSpec};
use wdrcc_grid::cases::load_bundled;
use wdrcc_oracle::{g_quadrature, SplitMix};

/// Reference approximation-bound table: (epsilon, delta, N, value).
const TABLE: [(f64, f64, usize, f64); 30] = [
    (0.01, 0.01, 3, 1.114),
    (0.01, 0.01, 5, 1.076),
    (0.01, 0.01, 9, 1.046),
    (0.01, 0.01, 19, 1.023),
    (0.01, 0.01, 29, 1.016),
    (0.01, 0.05, 3, 1.023),
    (0.01, 0.05, 5, 1.016),
    (0.01, 0.05, 9, 1.010),
    (0.01, 0.05, 19, 1.006),
    (0.01, 0.05, 29, 1.004),
    (0.01, 0.10, 3, 1.012),
    (0.01, 0.10, 5, 1.008),
    (0.01, 0.10, 9, 1.005),
    (0.01, 0.10, 19, 1.002),
    (0.01, 0.10, 29, 1.002),
    (0.05, 0.01, 3, 1.537),
    (0.05, 0.01, 5, 1.350),
    (0.05, 0.01, 9, 1.207),
    (0.05, 0.01, 19, 1.102),
    (0.05, 0.01, 29, 1.068),
    (0.05, 0.05, 3, 1.137),
    (0.05, 0.05, 5, 1.091),
    (0.05, 0.05, 9, 1.055),
    (0.05, 0.05, 19, 1.028),
    (0.05, 0.05, 29, 1.019),
    (0.05, 0.10, 3, 1.068),
    (0.05, 0.10, 5, 1.046),
    (0.05, 0.10, 9, 1.027),
    (0.05, 0.10, 19, 1.013),
    (0.05, 0.10, 29, 1.009),
];

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn spec(eps: f64, delta: f64) -> RiskSpec {
    RiskSpec::new(eps, delta).unwrap()
}

fn c1_table() -> Outcome {
    let start = Instant::now();
    let rows = apxbd_rows(&ApxBdOptions::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let mut worst: f64 = 0.0;
    let mut ok = rows.len() == 30;
    for &(e, d, n, want) in &TABLE {
        let r = rows.iter().find(|r| (r.epsilon, r.delta, r.pieces) == (e, d, n)).unwrap();
        let err = (r.bound - want).abs();
        worst = worst.max(err);
        ok &= err <= 0.02_f64.max(0.03 * want);
    }
    for (e, d, n, want) in [(0.01, 0.01, 3, 1.114), (0.05, 0.01, 3, 1.537), (0.01, 0.10, 29, 1.002)] {
        let r = rows.iter().find(|r| (r.epsilon, r.delta, r.pieces) == (e, d, n)).unwrap();
        ok &= (r.bound - want).abs() <= 0.02;
    }
    ok &= secs < 60.0;
    (ok, format!("max |error| {worst:.4}, {secs:.2} s"))
}

fn c2_theorem_chain() -> Outcome {
    let rows = apxbd_rows(&ApxBdOptions::default()).unwrap();
    let mut ok = true;
    let mut tightest = f64::INFINITY;
    for r in &rows {
        let max_g = r.max_g_ratio * r.delta;
        ok &= r.delta <= max_g + 1e-7 && max_g <= r.bound * r.delta + 1e-7;
        tightest = tightest.min(r.bound * r.delta - max_g);
    }
    (ok, format!("{} cells, smallest bound slack {tightest:.2e}", rows.len()))
}

fn c3_tightness() -> Outcome {
    let s = spec(0.05, 0.05);
    let ratios: Vec<f64> = [3, 9, 19, 29, 61]
        .iter()
        .map(|&n| max_g_on_boundary(&s, &construct_points(&s, n).unwrap()).unwrap() / 0.05)
        .collect();
    let monotone = ratios.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let ok = monotone && ratios[4] <= 1.02;
    (ok, format!("ratios {ratios:.4?}"))
}

fn c4_oracle() -> Outcome {
    let mut rng = SplitMix(2024);
    let (mut worst, mut worst_var, mut defined) = (0.0_f64, 0.0_f64, 0);
    for eps in [0.01, 0.05, 0.1] {
        let s = spec(eps, 0.05);
        for _ in 0..1000 {
            let b = Band::new(rng.range(-5.0, 0.5), rng.range(-0.5, 5.0));
            if b.u <= b.ell {
                continue;
            }
            let g = eval_g(&s, b).unwrap();
            worst = worst.max((g - g_quadrature(eps, b.ell, b.u)).abs());
            if let Ok(v) = eval_g_var_form(&s, b) {
                defined += 1;
                worst_var = worst_var.max((g - v).abs());
            }
        }
    }
    let ok = worst <= 1e-8 && worst_var <= 1e-7 && defined > 0;
    (ok, format!("quadrature {worst:.1e}, var form {worst_var:.1e} on {defined} bands"))
}

fn c5_inner() -> Outcome {
    let mut rng = SplitMix(7);
    let (mut ok, mut worst_vertex, mut min_margin) = (true, 0.0_f64, f64::INFINITY);
    for eps in [0.01, 0.05, 0.1] {
        for delta in [0.01, 0.05, 0.1] {
            let s = spec(eps, delta);
            let poly = construct_points(&s, 7).unwrap();
            for &v in poly.points() {
                worst_vertex = worst_vertex.max((eval_g(&s, v).unwrap() - delta).abs());
            }
            let (first, last) = (poly.first(), poly.last());
            let mut accepted = 0;
            while accepted < 1000 {
                let b = Band::new(rng.range(first.ell - 3.0, 0.0), rng.range(0.0, last.u + 3.0));
                if polyline_contains(&poly, b) {
                    accepted += 1;
                    let m = eval_g(&s, b).unwrap() - delta;
                    min_margin = min_margin.min(m);
                    ok &= m >= -1e-8;
                }
            }
        }
    }
    ok &= worst_vertex <= 1e-9;
    (ok, format!("min g - delta {min_margin:.2e}, vertex residual {worst_vertex:.1e}"))
}

fn c6_derivative() -> Outcome {
    let mut rng = SplitMix(99);
    let s = spec(0.05, 0.05);
    let (ell_lo, ell_hi) = (-4.0, -3.2);
    let g = |a: Band, b: Band, l: f64| eval_g(&s, a.lerp(b, l)).unwrap();
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let l1 = rng.range(ell_lo, ell_hi);
        let l2 = rng.range(ell_lo, ell_hi);
        let p1 = Band::new(l1, solve_u_on_levelset(&s, l1).unwrap());
        let p2 = Band::new(l2, solve_u_on_levelset(&s, l2).unwrap()).reflect();
        let lambda = rng.range(0.05, 0.95);
        let h = 1e-5;
        let fd = (g(p1, p2, lambda + h) - g(p1, p2, lambda - h)) / (2.0 * h);
        let exact = chord_slope(&s, p1, p2, lambda).unwrap();
        worst = worst.max((exact - fd).abs());
    }
    (worst <= 1e-6, format!("max |analytic - fd| {worst:.1e}"))
}

fn c7_solver() -> Outcome {
    let suite = regression_suite();
    let mut worst = 0.0_f64;
    let mut ok = suite.len() == 20;
    for prob in &suite {
        let sol = solve(&prob.program, 1e-8).unwrap();
        ok &= sol.status == Status::Optimal;
        worst = worst.max((sol.objective_value - prob.optimum).abs() / prob.optimum.abs().max(1.0));
    }
    ok &= worst <= 1e-6;
    let mut p = ConicProgram::new();
    let t = p.add_var("t");
    p.add_linear_cost(t, 1.0);
    p.add_soc(vec![AffineExpr::constant(3.0), AffineExpr::constant(4.0)], AffineExpr::var(t));
    let toy = solve(&p, 1e-10).unwrap();
    let toy_err = (toy.primal[0] - 5.0).abs();
    ok &= toy.status == Status::Optimal && toy_err <= 1e-8;
    (ok, format!("{} problems, max rel error {worst:.1e}; norm toy error {toy_err:.1e}", suite.len()))
}

fn c8_parser() -> Outcome {
    let mut ok = true;
    let mut seen = Vec::new();
    for (name, want) in [("case30", (30, 41, 6)), ("case39", (39, 46, 10)), ("case118", (118, 186, 54))] {
        let n = load_bundled(name).unwrap().unwrap();
        let got = (n.buses.len(), n.branches.len(), n.generators.len());
        ok &= got == want;
        seen.push(format!("{name} {got:?}"));
    }
    (ok, seen.join(", "))
}

fn c9_end_to_end() -> Outcome {
    let study = Study::new(StudyConfig::case118_weibull()).unwrap();
    let opts = OosOptions {
        seeds: vec![1, 2, 3, 4, 5],
        samples: 10_000,
    };
    let r = compare(&study, &opts).unwrap();
    let oos = |o: &wdrcc_cli::commands::Outcome| o.oos.map_or(0.0, |e| e.value);
    let robust_ok = r.seeds.iter().filter(|s| oos(&s.robust) >= 0.95).count();
    let cc_below = r.seeds.iter().filter(|s| oos(&s.gaussian) < oos(&s.robust)).count();
    let detail = r
        .seeds
        .iter()
        .map(|s| format!("{:.4}/{:.4}", oos(&s.robust), oos(&s.gaussian)))
        .collect::<Vec<_>>()
        .join(" ");
    (
        robust_ok >= 4 && cc_below >= 4,
        format!("2DRC/CC per seed {detail}; 2DRC>=0.95 in {robust_ok}/5, CC below in {cc_below}/5"),
    )
}

fn c10_trend() -> Outcome {
    let mut c = StudyConfig::case118_weibull();
    c.opf.delta = 0.08;
    c.opf.training_samples = 100;
    let study = Study::new(c).unwrap();
    let rows = pieces_trend(&study, &[3, 5, 7, 9], 1, 10_000).unwrap();
    let all_optimal = rows.iter().all(|r| r.outcome.status == Status::Optimal);
    let cost: Vec<f64> = rows.iter().map(|r| r.outcome.cost).collect();
    let oos: Vec<f64> = rows.iter().map(|r| r.outcome.oos.map_or(0.0, |e| e.value)).collect();
    // Costs agree to the solver tolerance when pieces stop mattering.
    let cost_ok = cost.windows(2).all(|w| w[1] <= w[0] + 1e-8 * w[0].abs());
    let oos_ok = oos.windows(2).all(|w| w[1] <= w[0]) && oos.iter().all(|&v| v >= 0.95);
    (
        all_optimal && cost_ok && oos_ok,
        format!("cost {cost:.2?}, oos {oos:.4?}"),
    )
}

fn c11_scalability() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut times = Vec::new();
    let mut ok = true;
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for (file, budget) in [("case30.json", 5.0), ("case39.json", 5.0), ("case118.json", 30.0)] {
        let c = StudyConfig::load(&root.join(file)).unwrap();
        let start = Instant::now();
        let (a, _) = run_solve(&c, 1, Formulation::Robust, dir.path()).unwrap();
        let study = Study::new(c.clone()).unwrap();
        study.oos(&a.dispatch, 1, c.oos_samples).unwrap();
        let secs = start.elapsed().as_secs_f64();
        ok &= a.dispatch.status == Status::Optimal && secs < budget;
        times.push(format!("{} {secs:.2} s", c.case));
    }
    (ok, times.join(", "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("approximation-bound table", c1_table),
        ("bound chain delta <= max g <= bound * delta", c2_theorem_chain),
        ("asymptotic tightness", c3_tightness),
        ("oracle equivalence", c4_oracle),
        ("inner approximation", c5_inner),
        ("chord derivative", c6_derivative),
        ("solver correctness", c7_solver),
        ("case parser counts", c8_parser),
        ("118-bus reliability vs Gaussian baseline", c9_end_to_end),
        ("piece-count trend", c10_trend),
        ("scalability", c11_scalability),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (ok, detail) = run();
        println!("{} {:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" }, i + 1);
        if !ok {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
