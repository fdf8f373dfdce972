use wdrcc_conic::regression::{construct, regression_suite, ProblemShape};
use wdrcc_conic::{solve, AffineExpr, ConicProgram, Status};

#[test]
fn norm_of_constant_vector() {
    let mut p = ConicProgram::new();
    let t = p.add_var("t");
    p.add_linear_cost(t, 1.0);
    p.add_soc(
        vec![AffineExpr::constant(3.0), AffineExpr::constant(4.0)],
        AffineExpr::var(t),
    );
    let sol = solve(&p, 1e-10).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.primal[0] - 5.0).abs() <= 1e-8, "t = {}", sol.primal[0]);
    assert!((sol.objective_value - 5.0).abs() <= 1e-8);
}

#[test]
fn scalar_quadratic() {
    let mut p = ConicProgram::new();
    let x = p.add_var("x");
    p.add_quadratic_cost(x, x, 1.0);
    p.add_linear_cost(x, -2.0);
    let sol = solve(&p, 1e-8).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.primal[0] - 1.0).abs() < 1e-8);
    assert!((sol.objective_value + 1.0).abs() < 1e-8);
}

#[test]
fn five_variable_constructed_socp() {
    let shape = ProblemShape {
        n: 5,
        equalities: 1,
        inequalities: 2,
        cones: vec![3, 3],
        quadratic_rank: 0,
    };
    for seed in 0..10 {
        let prob = construct(&shape, seed);
        let sol = solve(&prob.program, 1e-9).unwrap();
        assert_eq!(sol.status, Status::Optimal, "seed {seed}");
        let rel = (sol.objective_value - prob.optimum).abs() / prob.optimum.abs().max(1.0);
        assert!(rel <= 1e-6, "seed {seed}: {} vs {}", sol.objective_value, prob.optimum);
    }
}

#[test]
fn regression_suite_kkt_and_objective() {
    for (k, prob) in regression_suite().iter().enumerate() {
        let sol = solve(&prob.program, 1e-8).unwrap();
        assert_eq!(sol.status, Status::Optimal, "problem {k}: {:?}", sol.kkt_residuals);
        let r = sol.kkt_residuals;
        assert!(r.primal <= 1e-8 && r.dual <= 1e-8 && r.gap <= 1e-8, "problem {k}: {r:?}");
        let rel = (sol.objective_value - prob.optimum).abs() / prob.optimum.abs().max(1.0);
        assert!(rel <= 1e-6, "problem {k}: {} vs {}", sol.objective_value, prob.optimum);
        assert!(prob.program.max_violation(&sol.primal) <= 1e-7);
        assert!(sol.ineq_duals.iter().all(|&z| z >= 0.0));
    }
}

#[test]
fn scaling_objective_keeps_argmin() {
    for (k, prob) in regression_suite().iter().enumerate() {
        // Only strictly convex instances have a unique argmin.
        if prob.program.objective.quadratic.len() < prob.program.num_vars {
            continue;
        }
        let base = solve(&prob.program, 1e-10).unwrap();
        for c in [0.01, 7.5] {
            let mut scaled = prob.program.clone();
            scaled.objective.linear.iter_mut().for_each(|t| t.1 *= c);
            scaled.objective.quadratic.iter_mut().for_each(|t| t.2 *= c);
            let sol = solve(&scaled, 1e-10).unwrap();
            assert_eq!(sol.status, Status::Optimal);
            let diff = sol
                .primal
                .iter()
                .zip(&base.primal)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(diff <= 1e-5, "problem {k}, c = {c}: argmin moved by {diff}");
        }
    }
}

#[test]
fn infeasible_bounds_detected() {
    let mut p = ConicProgram::new();
    let x = p.add_var("x");
    p.add_linear_cost(x, 1.0);
    p.add_le(AffineExpr::constant(1.0) - AffineExpr::var(x)); // x >= 1
    p.add_le(AffineExpr::var(x)); // x <= 0
    let sol = solve(&p, 1e-8).unwrap();
    assert_eq!(sol.status, Status::Infeasible);
}

#[test]
fn infeasible_cone_detected() {
    let mut p = ConicProgram::new();
    let x = p.add_var("x");
    let t = p.add_var("t");
    p.add_linear_cost(t, 1.0);
    p.add_soc(vec![AffineExpr::var(x)], AffineExpr::var(t));
    p.add_eq(AffineExpr::var(x) - AffineExpr::constant(2.0));
    p.add_le(AffineExpr::var(t) - AffineExpr::constant(1.0));
    let sol = solve(&p, 1e-8).unwrap();
    assert_eq!(sol.status, Status::Infeasible);
}

#[test]
fn unbounded_detected() {
    let mut p = ConicProgram::new();
    let x = p.add_var("x");
    p.add_linear_cost(x, -1.0);
    p.add_le(-AffineExpr::var(x));
    let sol = solve(&p, 1e-8).unwrap();
    assert_eq!(sol.status, Status::Unbounded);
}

#[test]
fn max_iter_reports_best_iterate() {
    let prob = &regression_suite()[19];
    let settings = wdrcc_conic::Settings {
        max_iter: 2,
        ..Default::default()
    };
    let sol = wdrcc_conic::solve_with(&prob.program, &settings).unwrap();
    assert_eq!(sol.status, Status::MaxIter);
    assert!(sol.kkt_residuals.primal.is_finite());
    assert_eq!(sol.primal.len(), prob.program.num_vars);
}

#[test]
fn concurrent_solves_do_not_interfere() {
    let suite = regression_suite();
    let serial: Vec<f64> = suite
        .iter()
        .map(|p| solve(&p.program, 1e-8).unwrap().objective_value)
        .collect();
    let parallel: Vec<f64> = std::thread::scope(|sc| {
        let handles: Vec<_> = suite
            .iter()
            .map(|p| sc.spawn(move || solve(&p.program, 1e-8).unwrap().objective_value))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    assert_eq!(serial, parallel);
}

