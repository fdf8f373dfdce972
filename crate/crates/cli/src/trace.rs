//! Level-set tracing: g over a rectangle of bands plus points on the curve
//! `g = delta` for one or more radii.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use wdrcc_core::wdrcc::{
    construct_points, eval_g, solve_asymptotes, solve_symmetric_u0, solve_u_on_levelset,
};
use wdrcc_core::{Band, RiskSpec};

use crate::error::{CliError, Result};
use crate::manifest::{num, Table};

pub const GRID_SCHEMA: &str = "wdrcc.trace.grid/1";
pub const CURVE_SCHEMA: &str = "wdrcc.trace.curve/1";

/// Geometric approach of the sampled curve towards its vertical asymptote.
const APPROACH_RATIO: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    pub epsilon: f64,
    pub deltas: Vec<f64>,
    /// Polyline vertices emitted alongside each curve.
    pub pieces: usize,
    /// Grid points per axis.
    pub resolution: usize,
    /// Curve samples on each side of the symmetric point.
    pub curve_points: usize,
    /// Half-width of the grid; defaults to just past the widest curve's
    /// symmetric point.
    pub extent: Option<f64>,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            deltas: vec![0.02, 0.05, 0.08],
            pieces: 7,
            resolution: 101,
            curve_points: 24,
            extent: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    Curve,
    Symmetric,
    Vertex,
}

impl PointKind {
    fn as_str(self) -> &'static str {
        match self {
            PointKind::Curve => "curve",
            PointKind::Symmetric => "symmetric",
            PointKind::Vertex => "vertex",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub delta: f64,
    pub kind: PointKind,
    pub band: Band,
    /// `g - delta` at the point.
    pub residual: f64,
}

/// Points of the level curve ordered by increasing `ell`, the symmetric
/// point `(-u0, u0)` in the middle.
pub fn level_curve(spec: &RiskSpec, per_side: usize) -> Result<Vec<CurvePoint>> {
    let u0 = solve_symmetric_u0(spec)?;
    let (ell_star, _) = solve_asymptotes(spec)?;
    let mut upper = Vec::with_capacity(per_side);
    for i in 1..=per_side {
        let ell = ell_star - (u0 + ell_star) * APPROACH_RATIO.powi(i as i32);
        upper.push(Band::new(ell, solve_u_on_levelset(spec, ell)?));
    }
    let delta = spec.delta();
    let point = |kind, band| -> Result<CurvePoint> {
        Ok(CurvePoint {
            delta,
            kind,
            band,
            residual: eval_g(spec, band)? - delta,
        })
    };
    let mut out = Vec::with_capacity(2 * per_side + 1);
    for b in upper.iter().rev() {
        out.push(point(PointKind::Curve, b.reflect())?);
    }
    out.push(point(PointKind::Symmetric, Band::new(-u0, u0))?);
    for b in &upper {
        out.push(point(PointKind::Curve, *b)?);
    }
    Ok(out)
}

/// g on a `resolution x resolution` grid over `[-extent, 0] x [0, extent]`,
/// row-major in `ell`.
pub fn g_grid(epsilon: f64, extent: f64, resolution: usize) -> Result<Vec<(Band, f64)>> {
    if resolution < 2 || !(extent > 0.0) {
        return Err(CliError::Invalid(format!(
            "grid needs resolution >= 2 and a positive extent, got {resolution} and {extent}"
        )));
    }
    // g itself does not depend on delta.
    let spec = RiskSpec::new(epsilon, 1.0)?;
    let step = extent / (resolution - 1) as f64;
    (0..resolution * resolution)
        .into_par_iter()
        .map(|k| {
            let band = Band::new(-extent + (k / resolution) as f64 * step, (k % resolution) as f64 * step);
            Ok((band, eval_g(&spec, band)?))
        })
        .collect()
}

/// The grid table and the curve table.
pub fn trace_tables(opts: &TraceOptions) -> Result<(Table, Table)> {
    if opts.deltas.is_empty() {
        return Err(CliError::Invalid("at least one delta is required".into()));
    }
    let mut curve = Table::new(CURVE_SCHEMA, &["epsilon", "delta", "kind", "index", "ell", "u", "residual"]);
    let mut widest: f64 = 0.0;
    for &delta in &opts.deltas {
        let spec = RiskSpec::new(opts.epsilon, delta)?;
        let mut points = level_curve(&spec, opts.curve_points)?;
        widest = widest.max(points[opts.curve_points].band.u);
        let poly = construct_points(&spec, opts.pieces)?;
        for &band in poly.points() {
            points.push(CurvePoint {
                delta,
                kind: PointKind::Vertex,
                band,
                residual: eval_g(&spec, band)? - delta,
            });
        }
        let mut index = 0;
        let mut last = None;
        for p in points {
            // Indices restart for the vertex block.
            if last != Some(p.kind == PointKind::Vertex) {
                index = 0;
                last = Some(p.kind == PointKind::Vertex);
            }
            curve.push(vec![
                num(opts.epsilon),
                num(delta),
                p.kind.as_str().into(),
                index.to_string(),
                num(p.band.ell),
                num(p.band.u),
                num(p.residual),
            ]);
            index += 1;
        }
    }
    let extent = opts.extent.unwrap_or(1.5 * widest);
    let mut grid = Table::new(GRID_SCHEMA, &["epsilon", "ell", "u", "g"]);
    for (band, g) in g_grid(opts.epsilon, extent, opts.resolution)? {
        grid.push(vec![num(opts.epsilon), num(band.ell), num(band.u), num(g)]);
    }
    Ok((grid, curve))
}
