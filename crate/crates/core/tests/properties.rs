use proptest::prelude::*;
use wdrcc_core::gaussian::{cdf_antiderivative, std_cdf, std_quantile};
use wdrcc_core::wdrcc::{
    construct_points, eval_g, eval_gbar, eval_gunder, max_g_on_boundary, apx_bound,
    polyline_contains, segment_tau, solve_asymptotes, z0_membership,
};
use wdrcc_core::{Band, RiskSpec};
use wdrcc_oracle as oracle;

fn spec(eps: f64, delta: f64) -> RiskSpec {
    RiskSpec::new(eps, delta).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn cdf_symmetry_and_monotonicity(z in -30.0..30.0f64, dz in 0.0..3.0f64) {
        let a = std_cdf(z).unwrap();
        prop_assert!((a + std_cdf(-z).unwrap() - 1.0).abs() <= 1e-12);
        prop_assert!(std_cdf(z + dz).unwrap() >= a);
    }

    #[test]
    fn quantile_roundtrip(logp in -13.8f64..-0.0001) {
        let p = logp.exp();
        let z = std_quantile(p).unwrap();
        prop_assert!((std_cdf(z).unwrap() - p).abs() <= 1e-10);
    }

    #[test]
    fn antiderivative_matches_quadrature(a in -6.0..6.0f64, w in 0.0..4.0f64) {
        let b = a + w;
        let got = cdf_antiderivative(b).unwrap() - cdf_antiderivative(a).unwrap();
        let want = oracle::simpson(&oracle::normal_cdf, a, b, 1e-12);
        prop_assert!((got - want).abs() <= 1e-9, "{got} vs {want}");
    }

    #[test]
    fn g_symmetry(eps in 0.005..0.45f64, ell in -5.0..1.0f64, u in -1.0..5.0f64) {
        let s = spec(eps, 0.05);
        let a = eval_g(&s, Band::new(ell, u.max(ell))).unwrap();
        let b = eval_g(&s, Band::new(-u.max(ell), -ell)).unwrap();
        prop_assert!((a - b).abs() <= 1e-10);
    }

    #[test]
    fn g_monotone_in_each_argument(
        eps in 0.005..0.45f64, ell in -5.0..0.0f64, u in 0.0..5.0f64, d in 0.0..1.0f64,
    ) {
        let s = spec(eps, 0.05);
        let base = eval_g(&s, Band::new(ell, u)).unwrap();
        prop_assert!(eval_g(&s, Band::new(ell - d, u)).unwrap() >= base - 1e-14);
        prop_assert!(eval_g(&s, Band::new(ell, u + d)).unwrap() >= base - 1e-14);
    }

    #[test]
    fn gunder_mirrors_gbar(eps in 0.005..0.45f64, ell in -6.0..0.0f64) {
        let s = spec(eps, 0.05);
        prop_assert_eq!(eval_gunder(&s, ell).unwrap(), eval_gbar(&s, -ell).unwrap());
    }

    #[test]
    fn z0_midpoint_convexity(
        eps in prop::sample::select(vec![0.01, 0.05, 0.1]),
        a in (-6.0..0.0f64, 0.0..6.0f64),
        b in (-6.0..0.0f64, 0.0..6.0f64),
    ) {
        let s = spec(eps, 0.05);
        let (pa, pb) = (Band::new(a.0, a.1), Band::new(b.0, b.1));
        if z0_membership(&s, pa).unwrap() && z0_membership(&s, pb).unwrap() {
            prop_assert!(z0_membership(&s, pa.lerp(pb, 0.5)).unwrap());
        }
    }

    #[test]
    fn tau_bounds_sampled_chord(
        eps in prop::sample::select(vec![0.01, 0.05, 0.1]),
        delta in prop::sample::select(vec![0.01, 0.05, 0.1]),
        n in prop::sample::select(vec![3usize, 5, 9]),
        k in 0usize..8,
    ) {
        let s = spec(eps, delta);
        let poly = construct_points(&s, n).unwrap();
        let segs: Vec<_> = poly.segments().collect();
        let (p1, p2) = segs[k % segs.len()];
        let tau = segment_tau(&s, p1, p2).unwrap();
        prop_assert!(tau >= 1.0);
        for j in 0..=40 {
            let g = eval_g(&s, p1.lerp(p2, j as f64 / 40.0)).unwrap();
            prop_assert!(g <= tau * tau * delta + 1e-10);
        }
    }
}

#[test]
fn inner_approximation_random_points() {
    let mut rng = oracle::SplitMix(11);
    for &(eps, delta, n) in &[(0.05, 0.05, 3), (0.01, 0.1, 9), (0.1, 0.01, 5)] {
        let s = spec(eps, delta);
        let poly = construct_points(&s, n).unwrap();
        let (first, last) = (poly.first(), poly.last());
        let mut accepted = 0;
        while accepted < 300 {
            let b = Band::new(rng.range(first.ell - 3.0, 0.0), rng.range(0.0, last.u + 3.0));
            if polyline_contains(&poly, b) {
                accepted += 1;
                assert!(eval_g(&s, b).unwrap() >= delta - 1e-8);
            }
        }
    }
}

#[test]
fn vertices_approach_asymptote() {
    let s = spec(0.05, 0.05);
    let (_, u_star) = solve_asymptotes(&s).unwrap();
    let mut prev = f64::INFINITY;
    for n in [3, 9, 19, 29] {
        let gap = (construct_points(&s, n).unwrap().last().u - u_star).abs();
        assert!(gap < prev, "N={n}: gap {gap} not below {prev}");
        prev = gap;
    }
}

#[test]
fn theorem_chain_on_small_grid() {
    for eps in [0.01, 0.05] {
        for delta in [0.01, 0.05, 0.1] {
            let s = spec(eps, delta);
            let poly = construct_points(&s, 5).unwrap();
            let m = max_g_on_boundary(&s, &poly).unwrap();
            let b = apx_bound(&s, &poly).unwrap();
            assert!(delta <= m + 1e-7 && m <= b.bound * delta + 1e-7);
        }
    }
}
