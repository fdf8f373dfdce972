//! Approximation guarantees for the polyline.
//!
//! Along a chord between two level-set points, `sqrt(g)` is concave, so the
//! tangent lines at the two endpoints bound it from above. The ratio of the
//! tangent-intersection height to `sqrt(delta)` gives a per-segment factor
//! `tau`; `tau^2 * delta` bounds g on the segment. The two boundary rays are
//! bounded by the tail limits of g.

use serde::{Deserialize, Serialize};

use super::level::{eval_g, eval_gbar, eval_gunder, truncation_point};
use super::polyline::LevelPolyline;
use super::{Band, RiskSpec};
use crate::error::{Error, Result};
use crate::gaussian::cdf;
use crate::roots::golden_max;

/// Step for the central finite-difference check.
const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxBound {
    /// Largest squared segment factor.
    pub tau_sq_max: f64,
    /// g(-inf, u_N).
    pub tail_upper: f64,
    /// g(ell_1, +inf).
    pub tail_lower: f64,
    /// max{tau_sq_max, tail_upper / delta, tail_lower / delta}.
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentAnalysis {
    pub tau: f64,
    /// Where the two endpoint tangents of sqrt(s) intersect.
    pub lambda_star: f64,
    /// d/dlambda s at lambda = 0.
    pub slope_start: f64,
    /// d/dlambda s at lambda = 1.
    pub slope_end: f64,
}

/// `d/dlambda g((1 - lambda) p1 + lambda p2)`.
///
/// Differentiating under the integral leaves density integrals over
/// `[0, t*]`, which are CDF differences.
pub fn chord_slope(spec: &RiskSpec, p1: Band, p2: Band, lambda: f64) -> Result<f64> {
    let at = p1.lerp(p2, lambda);
    let t = truncation_point(spec, at)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    // int_0^t phi(u - s) ds = Phi(u) - Phi(u - t) = Phi(t - u) - Phi(-u)
    let upper_mass = cdf(t - at.u) - cdf(-at.u);
    // int_0^t phi(ell + s) ds = Phi(ell + t) - Phi(ell)
    let lower_mass = cdf(at.ell + t) - cdf(at.ell);
    Ok((p2.u - p1.u) * upper_mass - (p2.ell - p1.ell) * lower_mass)
}

fn check_on_level_set(spec: &RiskSpec, p: Band) -> Result<()> {
    let residual = eval_g(spec, p)? - spec.delta();
    if residual.abs() > spec.tolerances().root_tol {
        return Err(Error::OffLevelSet {
            ell: p.ell,
            u: p.u,
            residual,
        });
    }
    Ok(())
}

/// Tangent-intersection analysis of one chord between level-set points.
pub fn segment_analysis(spec: &RiskSpec, p1: Band, p2: Band) -> Result<SegmentAnalysis> {
    check_on_level_set(spec, p1)?;
    check_on_level_set(spec, p2)?;
    if p1.l1_distance(p2) == 0.0 {
        return Ok(SegmentAnalysis {
            tau: 1.0,
            lambda_star: 0.5,
            slope_start: 0.0,
            slope_end: 0.0,
        });
    }
    let slope_start = chord_slope(spec, p1, p2, 0.0)?;
    let slope_end = chord_slope(spec, p1, p2, 1.0)?;
    let root_delta = spec.delta().sqrt();
    // d/dlambda sqrt(s) = s' / (2 sqrt(s)) with s = delta at both ends.
    let h0 = slope_start / (2.0 * root_delta);
    let h1 = slope_end / (2.0 * root_delta);
    let denom = h0 - h1;
    if denom <= 0.0 {
        // Flat chord: the tangents coincide with the chord itself.
        return Ok(SegmentAnalysis {
            tau: 1.0,
            lambda_star: 0.5,
            slope_start,
            slope_end,
        });
    }
    let lambda_star = (-h1 / denom).clamp(0.0, 1.0);
    let peak = (root_delta + h0 * lambda_star).min(root_delta + h1 * (lambda_star - 1.0));
    Ok(SegmentAnalysis {
        tau: (peak / root_delta).max(1.0),
        lambda_star,
        slope_start,
        slope_end,
    })
}

/// Factor `tau` with `g <= tau^2 delta` along the chord from `p1` to `p2`.
pub fn segment_tau(spec: &RiskSpec, p1: Band, p2: Band) -> Result<f64> {
    segment_analysis(spec, p1, p2).map(|a| a.tau)
}

/// Largest gap between [`chord_slope`] and a central difference of g along
/// the chord, over lambda in {0, 1/2, 1}.
pub fn endpoint_derivative_fd_check(spec: &RiskSpec, p1: Band, p2: Band) -> Result<f64> {
    let s = |lambda: f64| eval_g(spec, p1.lerp(p2, lambda));
    let mut worst: f64 = 0.0;
    for lambda in [0.0, 0.5, 1.0] {
        let analytic = chord_slope(spec, p1, p2, lambda)?;
        let fd = (s(lambda + FD_STEP)? - s(lambda - FD_STEP)?) / (2.0 * FD_STEP);
        worst = worst.max((analytic - fd).abs());
    }
    Ok(worst)
}

/// The computable bound on `max g / delta` over the polyline boundary.
pub fn apx_bound(spec: &RiskSpec, poly: &LevelPolyline) -> Result<ApproxBound> {
    let mut tau_sq_max: f64 = 1.0;
    for (a, b) in poly.segments() {
        let tau = segment_tau(spec, a, b)?;
        tau_sq_max = tau_sq_max.max(tau * tau);
    }
    let tail_upper = eval_gbar(spec, poly.last().u)?;
    let tail_lower = eval_gunder(spec, poly.first().ell)?;
    let delta = spec.delta();
    let bound = tau_sq_max.max(tail_upper / delta).max(tail_lower / delta);
    Ok(ApproxBound {
        tau_sq_max,
        tail_upper,
        tail_lower,
        bound,
    })
}

/// The largest value of g anywhere on the polyline boundary.
///
/// g is unimodal along each segment; along the two rays it increases
/// monotonically to the tail limits.
pub fn max_g_on_boundary(spec: &RiskSpec, poly: &LevelPolyline) -> Result<f64> {
    let mut best = eval_gbar(spec, poly.last().u)?.max(eval_gunder(spec, poly.first().ell)?);
    for (a, b) in poly.segments() {
        let (_, v) = golden_max(
            |lambda| eval_g(spec, a.lerp(b, lambda)).unwrap_or(f64::NEG_INFINITY),
            0.0,
            1.0,
            1e-10,
        );
        best = best.max(v);
    }
    Ok(best)
}
