//! The polyhedral inner approximation of the robust band set.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::level::{eval_g, solve_asymptotes, solve_symmetric_u0, solve_u_on_levelset};
use super::{Band, RiskSpec};
use crate::error::{Error, Result};

/// N points on the delta-level curve of g, ordered by decreasing `ell`.
///
/// The region above the piecewise-linear curve through these points, closed
/// off by a vertical ray at the first point and a horizontal ray at the
/// last, lies inside the exact robust set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolylineJson", into = "PolylineJson")]
pub struct LevelPolyline {
    spec: RiskSpec,
    points: Vec<Band>,
}

/// Wire form: `{"epsilon": .., "delta": .., "points": [[ell, u], ..]}`.
#[derive(Serialize, Deserialize)]
struct PolylineJson {
    epsilon: f64,
    delta: f64,
    points: Vec<[f64; 2]>,
}

impl TryFrom<PolylineJson> for LevelPolyline {
    type Error = Error;

    fn try_from(json: PolylineJson) -> Result<Self> {
        let spec = RiskSpec::new(json.epsilon, json.delta)?;
        let points = json.points.iter().map(|p| Band::new(p[0], p[1])).collect();
        LevelPolyline::from_points(spec, points)
    }
}

impl From<LevelPolyline> for PolylineJson {
    fn from(poly: LevelPolyline) -> Self {
        Self {
            epsilon: poly.spec.epsilon(),
            delta: poly.spec.delta(),
            points: poly.points.iter().map(|b| [b.ell, b.u]).collect(),
        }
    }
}

impl LevelPolyline {
    /// Validates externally supplied points.
    pub fn from_points(spec: RiskSpec, points: Vec<Band>) -> Result<Self> {
        let n = points.len();
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::InvalidPolyline(format!(
                "need an odd number of points >= 3, got {n}"
            )));
        }
        for w in points.windows(2) {
            if !(w[0].ell > w[1].ell && w[0].u > w[1].u) {
                return Err(Error::InvalidPolyline(format!(
                    "points must strictly decrease in both coordinates: {:?} then {:?}",
                    w[0], w[1]
                )));
            }
        }
        let sym_tol = 1e-12;
        for (i, p) in points.iter().enumerate() {
            let mirror = points[n - 1 - i].reflect();
            if p.l1_distance(mirror) > sym_tol * (1.0 + p.u.abs()) {
                return Err(Error::InvalidPolyline(format!(
                    "point {i} {p:?} is not the reflection of point {}",
                    n - 1 - i
                )));
            }
        }
        let root_tol = spec.tolerances().root_tol;
        for p in &points {
            let residual = eval_g(&spec, *p)? - spec.delta();
            if residual.abs() > root_tol {
                return Err(Error::OffLevelSet {
                    ell: p.ell,
                    u: p.u,
                    residual,
                });
            }
        }
        Ok(Self { spec, points })
    }

    pub fn spec(&self) -> &RiskSpec {
        &self.spec
    }

    pub fn points(&self) -> &[Band] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> Band {
        self.points[0]
    }

    pub fn last(&self) -> Band {
        self.points[self.points.len() - 1]
    }

    /// The centre point `(-u0, u0)`.
    pub fn center(&self) -> Band {
        self.points[self.points.len() / 2]
    }

    /// Adjacent vertex pairs.
    pub fn segments(&self) -> impl Iterator<Item = (Band, Band)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }
}

/// Builds the N-point polyline: evenly spaced interior grid points between
/// the centre and the asymptote, their mirror images, and the centre.
pub fn construct_points(spec: &RiskSpec, n: usize) -> Result<LevelPolyline> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::InvalidPolyline(format!(
            "N must be odd and at least 3, got {n}"
        )));
    }
    let u0 = solve_symmetric_u0(spec)?;
    let (ell_bar, _) = solve_asymptotes(spec)?;
    let half = (n - 1) / 2;
    // Both endpoints are excluded: -u0 duplicates the centre and ell_bar
    // maps to u = +inf.
    let step = (ell_bar + u0) / (half + 1) as f64;
    let mut upper = Vec::with_capacity(half);
    for i in 1..=half {
        let ell = -u0 + i as f64 * step;
        let u = solve_u_on_levelset(spec, ell)?;
        upper.push(Band::new(ell, u));
    }
    let mut points: Vec<Band> = upper.iter().rev().copied().collect();
    points.push(Band::new(-u0, u0));
    points.extend(upper.iter().map(|b| b.reflect()));
    LevelPolyline::from_points(*spec, points)
}

/// Whether `band` satisfies every half-plane of the polyline.
pub fn polyline_contains(poly: &LevelPolyline, band: Band) -> bool {
    let Band { ell, u } = band;
    if ell > poly.first().ell || u < poly.last().u {
        return false;
    }
    poly.segments().all(|(a, b)| {
        (u - a.u) * (a.ell - b.ell) >= (a.u - b.u) * (ell - a.ell)
    })
}

/// Exact membership in the standardized robust set `{g >= delta}`.
pub fn z0_membership(spec: &RiskSpec, band: Band) -> Result<bool> {
    Ok(eval_g(spec, band)? >= spec.delta() - spec.tolerances().abs_tol)
}

/// Exact membership of `(x, ell, u)` in the robust set for
/// `xi ~ N(mu, F F')`, where `sigma_factor` is `F`.
pub fn z_membership(
    spec: &RiskSpec,
    mu: &DVector<f64>,
    sigma_factor: &DMatrix<f64>,
    x: &DVector<f64>,
    band: Band,
) -> Result<bool> {
    let dim = x.len();
    if mu.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: mu.len(),
        });
    }
    if sigma_factor.nrows() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: sigma_factor.nrows(),
        });
    }
    let shift = x.dot(mu);
    let dual_norm = (sigma_factor.transpose() * x).norm();
    if dual_norm == 0.0 {
        return Ok(band.ell <= shift && shift <= band.u);
    }
    let standardized = Band::new((band.ell - shift) / dual_norm, (band.u - shift) / dual_norm);
    z0_membership(spec, standardized)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wdrcc::level::solve_u_on_levelset;
    use wdrcc_oracle as oracle;

    fn spec(eps: f64, delta: f64) -> RiskSpec {
        RiskSpec::new(eps, delta).unwrap()
    }

    #[test]
    fn three_points() {
        let s = spec(0.05, 0.05);
        let poly = construct_points(&s, 3).unwrap();
        assert_eq!(poly.len(), 3);
        let c = poly.center();
        assert_eq!(c.ell, -c.u);
        assert_eq!(poly.last(), poly.first().reflect());
        for p in poly.points() {
            let q = oracle::g_quadrature(0.05, p.ell, p.u);
            assert!((q - 0.05).abs() <= 1e-10, "{p:?}: {}", q - 0.05);
        }
    }

    #[test]
    fn nine_points_ordered_and_symmetric() {
        let s = spec(0.1, 0.05);
        let poly = construct_points(&s, 9).unwrap();
        let pts = poly.points();
        for w in pts.windows(2) {
            assert!(w[0].ell > w[1].ell && w[0].u > w[1].u);
        }
        for i in 0..9 {
            assert_eq!(pts[i], pts[8 - i].reflect());
            assert!(pts[i].ell < 0.0 && pts[i].u > 0.0);
        }
    }

    #[test]
    fn rejects_even_or_small_n() {
        let s = spec(0.05, 0.05);
        assert!(construct_points(&s, 4).is_err());
        assert!(construct_points(&s, 1).is_err());
    }

    #[test]
    fn vertices_contained_and_outside_rejected() {
        let s = spec(0.05, 0.05);
        let poly = construct_points(&s, 7).unwrap();
        for p in poly.points() {
            assert!(polyline_contains(&poly, *p));
        }
        let first = poly.first();
        assert!(!polyline_contains(&poly, Band::new(first.ell + 0.01, first.u)));
        let last = poly.last();
        assert!(!polyline_contains(&poly, Band::new(last.ell, last.u - 0.01)));
    }

    #[test]
    fn contained_points_are_robust() {
        let s = spec(0.05, 0.05);
        let poly = construct_points(&s, 5).unwrap();
        let mut rng = oracle::SplitMix(11);
        let mut accepted = 0;
        while accepted < 300 {
            let b = Band::new(rng.range(-6.0, 0.0), rng.range(0.0, 6.0));
            if polyline_contains(&poly, b) {
                accepted += 1;
                assert!(eval_g(&s, b).unwrap() >= 0.05 - 1e-8);
            }
        }
    }

    #[test]
    fn json_roundtrip_and_validation() {
        let s = spec(0.05, 0.05);
        let poly = construct_points(&s, 5).unwrap();
        let text = serde_json::to_string(&poly).unwrap();
        assert!(text.starts_with("{\"epsilon\":0.05,\"delta\":0.05,\"points\":[["));
        let back: LevelPolyline = serde_json::from_str(&text).unwrap();
        assert_eq!(back, poly);

        let mut pts = poly.points().to_vec();
        pts[0].u += 1e-3;
        assert!(LevelPolyline::from_points(s, pts).is_err());
        let bad = r#"{"epsilon":0.05,"delta":0.05,"points":[[-1,1],[-2,0.5]]}"#;
        assert!(serde_json::from_str::<LevelPolyline>(bad).is_err());
    }

    #[test]
    fn z0_examples() {
        let s = spec(0.05, 0.05);
        let u0 = crate::wdrcc::solve_symmetric_u0(&s).unwrap();
        assert!(z0_membership(&s, Band::new(-u0, u0)).unwrap());
        assert!(!z0_membership(&s, Band::new(0.0, 0.0)).unwrap());
        let u = solve_u_on_levelset(&s, -3.5).unwrap();
        assert!(z0_membership(&s, Band::new(-3.5, u + 1e-3)).unwrap());
        assert!(!z0_membership(&s, Band::new(-3.5, u - 1e-3)).unwrap());
        let mut rng = oracle::SplitMix(5);
        for _ in 0..50 {
            let b = Band::new(rng.range(-4.0, 0.0), rng.range(0.0, 4.0));
            let q = oracle::g_quadrature(0.05, b.ell, b.u);
            if (q - 0.05).abs() > 1e-7 {
                assert_eq!(z0_membership(&s, b).unwrap(), q >= 0.05);
            }
        }
    }

    #[test]
    fn z_membership_deterministic_cases() {
        let s = spec(0.05, 0.05);
        let mu = DVector::zeros(2);
        let f = DMatrix::identity(2, 2);
        let x = DVector::zeros(2);
        assert!(z_membership(&s, &mu, &f, &x, Band::new(-1.0, 1.0)).unwrap());
        assert!(!z_membership(&s, &mu, &f, &x, Band::new(0.5, 1.0)).unwrap());
        let short = DVector::zeros(3);
        assert!(matches!(
            z_membership(&s, &mu, &f, &short, Band::new(-1.0, 1.0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn z_membership_positive_homogeneity() {
        let s = spec(0.05, 0.05);
        let mut rng = oracle::SplitMix(17);
        for _ in 0..100 {
            let dim = 3;
            let mu = DVector::zeros(dim);
            let f = DMatrix::from_fn(dim, dim, |i, j| {
                if i == j {
                    1.0 + rng.uniform()
                } else if i > j {
                    rng.range(-0.5, 0.5)
                } else {
                    0.0
                }
            });
            let x = DVector::from_fn(dim, |_, _| rng.range(-1.0, 1.0));
            let band = Band::new(rng.range(-8.0, 0.0), rng.range(0.0, 8.0));
            let c = rng.range(0.1, 10.0);
            let a = z_membership(&s, &mu, &f, &x, band).unwrap();
            let b = z_membership(&s, &mu, &f, &(&x * c), Band::new(c * band.ell, c * band.u)).unwrap();
            // Direct standardization.
            let norm = (f.transpose() * &x).norm();
            let direct = eval_g(&s, Band::new(band.ell / norm, band.u / norm)).unwrap();
            if (direct - 0.05).abs() > 1e-9 {
                assert_eq!(a, b);
                assert_eq!(a, direct >= 0.05);
            }
        }
    }
}
