//! The function g_eps, its tail limits, and root finding on its level set.

use super::{Band, RiskSpec};
use crate::error::{Error, Result};
use crate::gaussian::{cdf, pdf, quantile};
use crate::quadrature;
use crate::roots::{bracket_up, brent, RootOptions};

/// Doubling ceiling for level-set brackets.
const BRACKET_CEILING: f64 = 1e3;

/// `int_a^b Phi(v) dv` using the anchor-free antiderivative
/// `z Phi(z) + phi(z)`, which stays small on the negative axis.
fn cdf_integral_between(a: f64, b: f64) -> f64 {
    let anti = |z: f64| {
        if z == f64::NEG_INFINITY {
            0.0
        } else {
            z * cdf(z) + pdf(z)
        }
    };
    anti(b) - anti(a)
}

fn root_opts() -> RootOptions {
    RootOptions {
        xtol: 1e-15,
        ftol: 0.0,
        max_iter: 200,
    }
}

/// The point `t*` where `Phi(u - t) - Phi(ell + t) = 1 - eps`, or zero when
/// the band already has probability at most `1 - eps`.
pub fn truncation_point(spec: &RiskSpec, band: Band) -> Result<f64> {
    let Band { ell, u } = band;
    if ell.is_nan() || u.is_nan() {
        return Err(Error::NonFinite(f64::NAN));
    }
    if !(ell.is_finite() && u.is_finite()) {
        return Err(Error::Precondition(
            "truncation point needs a finite band".into(),
        ));
    }
    // Phi(u - t) - Phi(ell + t) - (1 - eps), written with lower tails so
    // values near one keep their precision.
    let excess = |t: f64| spec.epsilon() - cdf(t - u) - cdf(ell + t);
    if excess(0.0) <= 0.0 {
        return Ok(0.0);
    }
    // The integrand is strictly decreasing and equals -(1 - eps) < 0 at the
    // band midpoint.
    brent(excess, 0.0, 0.5 * (u - ell), root_opts())
}

/// g_eps(ell, u): the positive-part integral that defines the robust band.
///
/// Infinite `ell` routes to [`eval_gbar`]; infinite `u` to [`eval_gunder`].
pub fn eval_g(spec: &RiskSpec, band: Band) -> Result<f64> {
    let Band { ell, u } = band;
    if ell.is_nan() || u.is_nan() {
        return Err(Error::NonFinite(f64::NAN));
    }
    match (ell == f64::NEG_INFINITY, u == f64::INFINITY) {
        (true, true) => return Ok(f64::INFINITY),
        (true, false) => return eval_gbar(spec, u),
        (false, true) => return eval_gunder(spec, ell),
        _ => {}
    }
    if !(ell.is_finite() && u.is_finite()) || ell > u {
        return Ok(0.0);
    }
    let t = truncation_point(spec, band)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    // int_0^t [eps - Phi(s - u) - Phi(ell + s)] ds
    let value = spec.epsilon() * t - cdf_integral_between(-u, t - u) - cdf_integral_between(ell, ell + t);
    Ok(value.max(0.0))
}

/// g_eps(-inf, u): supremum of g along the horizontal ray through `u`.
pub fn eval_gbar(spec: &RiskSpec, u: f64) -> Result<f64> {
    if u.is_nan() {
        return Err(Error::NonFinite(u));
    }
    if u == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let q = spec.upper_quantile();
    if u <= q {
        return Ok(0.0);
    }
    let t = u - q;
    let value = spec.epsilon() * t - cdf_integral_between(-u, -q);
    Ok(value.max(0.0))
}

/// g_eps(ell, +inf), the mirror image of [`eval_gbar`].
pub fn eval_gunder(spec: &RiskSpec, ell: f64) -> Result<f64> {
    eval_gbar(spec, -ell)
}

/// The same quantity as [`eval_g`], computed the long way: bisect for the
/// epsilon-quantile of `min(zeta - ell, u - zeta)` and integrate the excess
/// coverage up to it numerically.
pub fn eval_g_var_form(spec: &RiskSpec, band: Band) -> Result<f64> {
    let Band { ell, u } = band;
    if !(ell.is_finite() && u.is_finite()) {
        return Err(Error::NonFinite(if ell.is_finite() { u } else { ell }));
    }
    let level = 1.0 - spec.epsilon();
    let coverage = |t: f64| {
        if 2.0 * t >= u - ell {
            0.0
        } else {
            cdf(u - t) - cdf(ell + t)
        }
    };
    if coverage(0.0) < level {
        return Err(Error::Precondition(format!(
            "band ({ell}, {u}) has coverage {} below 1 - eps",
            coverage(0.0)
        )));
    }
    // VaR: largest t with P[phi >= t] >= 1 - eps, by bisection.
    let (mut lo, mut hi) = (0.0, 0.5 * (u - ell));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if coverage(mid) >= level {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let var = 0.5 * (lo + hi);
    Ok(quadrature::integrate(
        |t| coverage(t) - level,
        0.0,
        var,
        spec.tolerances().quad_tol * 1e-3,
    ))
}

/// Asymptotes of the level curve: `gbar(u*) = delta` and `ell* = -u*`.
pub fn solve_asymptotes(spec: &RiskSpec) -> Result<(f64, f64)> {
    let delta = spec.delta();
    let f = |u: f64| eval_gbar(spec, u).map(|g| g - delta).unwrap_or(f64::NAN);
    let lo = spec.upper_quantile();
    let hi = bracket_up(f, lo, 1.0, BRACKET_CEILING)?;
    let u_star = brent(f, lo, hi, root_opts())?;
    Ok((-u_star, u_star))
}

fn check_residual(spec: &RiskSpec, band: Band) -> Result<()> {
    let residual = eval_g(spec, band)? - spec.delta();
    if residual.abs() > spec.tolerances().root_tol {
        return Err(Error::OffLevelSet {
            ell: band.ell,
            u: band.u,
            residual,
        });
    }
    Ok(())
}

/// The upper end `u` of the level-set point with lower end `ell`.
pub fn solve_u_on_levelset(spec: &RiskSpec, ell: f64) -> Result<f64> {
    if !ell.is_finite() {
        return Err(Error::NonFinite(ell));
    }
    let delta = spec.delta();
    let sup = eval_gunder(spec, ell)?;
    if sup <= delta {
        return Err(Error::NoRoot(format!(
            "g(ell, +inf) = {sup:e} <= delta = {delta:e} at ell = {ell}: no finite u"
        )));
    }
    // g(ell, .) is zero up to the u with Phi(u) - Phi(ell) = 1 - eps.
    let u_lo = -quantile(spec.epsilon() - cdf(ell));
    let f = |u: f64| eval_g(spec, Band::new(ell, u)).map(|g| g - delta).unwrap_or(f64::NAN);
    let u_hi = bracket_up(f, u_lo, 1.0, BRACKET_CEILING)?;
    let u = brent(f, u_lo, u_hi, root_opts())?;
    check_residual(spec, Band::new(ell, u))?;
    Ok(u)
}

/// The symmetric level-set point `(-u0, u0)`.
pub fn solve_symmetric_u0(spec: &RiskSpec) -> Result<f64> {
    let delta = spec.delta();
    let f = |u: f64| eval_g(spec, Band::new(-u, u)).map(|g| g - delta).unwrap_or(f64::NAN);
    let lo = -quantile(0.5 * spec.epsilon());
    let hi = bracket_up(f, lo, 1.0, BRACKET_CEILING)?;
    let u0 = brent(f, lo, hi, root_opts())?;
    check_residual(spec, Band::new(-u0, u0))?;
    Ok(u0)
}
