//! The robust DC dispatch as a conic program.
//!
//! Power is per unit of `base_mva` inside the program, angles are radians.
//! Each generator follows the affine recourse `p_g - alpha_g * xi_tot`;
//! the total forecast error `xi_tot` is shared by all participating units.
//! Branch flow deviations come from the Laplacian pseudo-inverse applied to
//! the (balanced) injection deviation.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use wdrcc_conic::{add_two_sided_drcc, AffineExpr, ConicProgram, DrccHandle, VarId};
use wdrcc_core::wdrcc::eval_g;
use wdrcc_core::{Band, RiskSpec};
use wdrcc_grid::{DcOperators, Network};

use crate::config::{ConstraintId, OpfConfig, Polylines};
use crate::error::{OpfError, Result};
use crate::fleet::WindFleet;
use crate::moments::MomentEstimate;

/// Variable positions of the physical decisions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    /// Scheduled output per generator, p.u.
    pub p: Vec<VarId>,
    /// Participation factors; empty in the deterministic model.
    pub alpha: Vec<VarId>,
    /// Bus angles, rad.
    pub theta: Vec<VarId>,
    pub slack: usize,
}

/// One emitted two-sided constraint `ell <= x' xi <= u` (p.u.).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrccRecord {
    pub id: ConstraintId,
    pub epsilon: f64,
    pub delta: f64,
    pub x: Vec<AffineExpr>,
    pub ell: AffineExpr,
    pub u: AffineExpr,
    pub handle: DrccHandle,
}

#[derive(Debug, Clone)]
pub struct OpfModel {
    pub program: ConicProgram,
    pub layout: Layout,
    pub drccs: Vec<DrccRecord>,
    pub base_mva: f64,
}

fn slack_index(network: &Network, slack_bus: Option<i64>) -> Result<usize> {
    match slack_bus {
        Some(id) => network.bus_index(id).ok_or(OpfError::MissingSlack(id)),
        None if network.buses.is_empty() => Err(OpfError::MissingSlack(0)),
        None => Ok(0),
    }
}

/// Dispatch variables, cost, power balance and the angle equations.
fn base_model(network: &Network, fleet: &WindFleet, slack: usize) -> Result<(ConicProgram, Layout)> {
    for (index, g) in network.generators.iter().enumerate() {
        if g.pmin_mw > g.pmax_mw {
            return Err(OpfError::InvertedLimits {
                index,
                pmin: g.pmin_mw,
                pmax: g.pmax_mw,
            });
        }
    }
    let base = network.base_mva;
    let wind = fleet.bus_indices(network)?;
    let nb = network.buses.len();
    let mut prog = ConicProgram::new();
    let p = prog.add_vars("p", network.generators.len());
    let theta = prog.add_vars("theta", nb);

    for (g, &v) in network.generators.iter().zip(&p) {
        // Cost is in $/h with MW arguments; p = base * p_pu.
        if g.cost.c2 != 0.0 {
            prog.add_quadratic_cost(v, v, g.cost.c2 * base * base);
        }
        prog.add_linear_cost(v, g.cost.c1 * base);
        prog.objective.constant += g.cost.c0;
    }

    // Net fixed injection per bus: forecast minus load.
    let mut fixed = DVector::from_iterator(nb, network.buses.iter().map(|b| -b.load_mw / base));
    for (&i, &mu) in wind.iter().zip(&fleet.forecast_mw) {
        fixed[i] += mu / base;
    }

    let mut balance = AffineExpr::constant(fixed.sum());
    for &v in &p {
        balance.add_term(v, 1.0);
    }
    prog.add_eq(balance);

    // B theta = injection, without the slack row.
    let mut rows: Vec<AffineExpr> = (0..nb).map(|i| AffineExpr::constant(fixed[i])).collect();
    for (g, &v) in network.generators.iter().zip(&p) {
        rows[g.bus].add_term(v, 1.0);
    }
    let mut rows: Vec<AffineExpr> = rows.into_iter().map(|r| -r).collect();
    for br in &network.branches {
        let (i, j, b) = (br.from, br.to, br.susceptance);
        rows[i].add_term(theta[i], b).add_term(theta[j], -b);
        rows[j].add_term(theta[j], b).add_term(theta[i], -b);
    }
    for (i, r) in rows.into_iter().enumerate() {
        if i != slack {
            prog.add_eq(r.compact());
        }
    }
    prog.add_eq(AffineExpr::var(theta[slack]));

    Ok((
        prog,
        Layout {
            p,
            alpha: Vec::new(),
            theta,
            slack,
        },
    ))
}

fn nominal_flow(layout: &Layout, from: usize, to: usize, beta: f64) -> AffineExpr {
    AffineExpr::from_terms([(layout.theta[from], beta), (layout.theta[to], -beta)], 0.0)
}

/// Builds the robust dispatch program.
///
/// `moments` are in MW; `polys` must hold every `(epsilon, delta)` pair the
/// config refers to (see [`Polylines::for_config`]).
pub fn assemble(
    network: &Network,
    operators: &DcOperators,
    fleet: &WindFleet,
    moments: &MomentEstimate,
    config: &OpfConfig,
    polys: &Polylines,
) -> Result<OpfModel> {
    config.validate()?;
    if moments.dim() != fleet.len() {
        return Err(OpfError::DimensionMismatch(format!(
            "{} wind buses but moments of dimension {}",
            fleet.len(),
            moments.dim()
        )));
    }
    let nb = network.buses.len();
    if operators.pseudo_inverse.nrows() != nb {
        return Err(OpfError::DimensionMismatch(format!(
            "{nb} buses but operators of size {}",
            operators.pseudo_inverse.nrows()
        )));
    }
    if polys.pieces() != config.pieces {
        return Err(OpfError::Config(format!(
            "polylines have {} points, config asks for {}",
            polys.pieces(),
            config.pieces
        )));
    }
    let slack = slack_index(network, config.slack_bus)?;
    let (mut prog, mut layout) = base_model(network, fleet, slack)?;
    let base = network.base_mva;
    let wind = fleet.bus_indices(network)?;
    let k = wind.len();
    let pu = moments.rescaled(base);

    layout.alpha = prog.add_vars("alpha", network.generators.len());
    let mut total = AffineExpr::constant(-1.0);
    for &a in &layout.alpha {
        total.add_term(a, 1.0);
        prog.add_le(AffineExpr::term(a, -1.0));
    }
    prog.add_eq(total);

    let poly_for = |id: ConstraintId| -> Result<(f64, f64, &wdrcc_core::LevelPolyline)> {
        let (e, d) = config.risk_for(id);
        let poly = polys
            .cached(e, d)
            .ok_or_else(|| OpfError::Config(format!("no polyline built for eps={e}, delta={d}")))?;
        Ok((e, d, poly))
    };

    let mut drccs = Vec::new();
    for (gi, g) in network.generators.iter().enumerate() {
        let id = ConstraintId::Generator(gi);
        let (epsilon, delta, poly) = poly_for(id)?;
        let x = vec![AffineExpr::term(layout.alpha[gi], -1.0); k];
        let ell = AffineExpr::from_terms([(layout.p[gi], -1.0)], g.pmin_mw / base);
        let u = AffineExpr::from_terms([(layout.p[gi], -1.0)], g.pmax_mw / base);
        let handle = add_two_sided_drcc(&mut prog, &x, &ell, &u, &pu.mean, &pu.factor, poly)?;
        drccs.push(DrccRecord {
            id,
            epsilon,
            delta,
            x,
            ell,
            u,
            handle,
        });
    }

    let pinv = &operators.pseudo_inverse;
    for (bi, br) in network.limited_branches() {
        let id = ConstraintId::Branch(bi);
        let (epsilon, delta, poly) = poly_for(id)?;
        let rate = br.rate_mw.expect("limited branch") / base;
        let beta = br.susceptance;
        // w = B^+ (e_i - e_j); flow deviation = beta * w' dinj.
        let w = |bus: usize| pinv[(bus, br.from)] - pinv[(bus, br.to)];
        let mut shared = AffineExpr::zero();
        for (gi, g) in network.generators.iter().enumerate() {
            let c = beta * w(g.bus);
            if c != 0.0 {
                shared.add_term(layout.alpha[gi], -c);
            }
        }
        let shared = shared.compact();
        let x: Vec<AffineExpr> = wind
            .iter()
            .map(|&bus| {
                let mut e = shared.clone();
                e.constant += beta * w(bus);
                e
            })
            .collect();
        let flow = nominal_flow(&layout, br.from, br.to, beta);
        let ell = AffineExpr::constant(-rate) - flow.clone();
        let u = AffineExpr::constant(rate) - flow;
        let handle = add_two_sided_drcc(&mut prog, &x, &ell, &u, &pu.mean, &pu.factor, poly)?;
        drccs.push(DrccRecord {
            id,
            epsilon,
            delta,
            x,
            ell,
            u,
            handle,
        });
    }

    Ok(OpfModel {
        program: prog,
        layout,
        drccs,
        base_mva: base,
    })
}

/// The deterministic DC dispatch at the forecast: hard generator and flow
/// limits, no recourse.
pub fn deterministic(network: &Network, fleet: &WindFleet, slack_bus: Option<i64>) -> Result<OpfModel> {
    let slack = slack_index(network, slack_bus)?;
    let (mut prog, layout) = base_model(network, fleet, slack)?;
    let base = network.base_mva;
    for (g, &v) in network.generators.iter().zip(&layout.p) {
        prog.add_le(AffineExpr::from_terms([(v, -1.0)], g.pmin_mw / base));
        prog.add_le(AffineExpr::from_terms([(v, 1.0)], -g.pmax_mw / base));
    }
    for (_, br) in network.limited_branches() {
        let rate = br.rate_mw.expect("limited branch") / base;
        let flow = nominal_flow(&layout, br.from, br.to, br.susceptance);
        prog.add_le(flow.clone() - AffineExpr::constant(rate));
        prog.add_le(-flow - AffineExpr::constant(rate));
    }
    Ok(OpfModel {
        program: prog,
        layout,
        drccs: Vec::new(),
        base_mva: base,
    })
}

/// Outcome of the exact membership test for one constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipCheck {
    pub id: ConstraintId,
    /// `g_eps` of the standardized band minus `delta`; nonnegative inside.
    pub margin: f64,
    /// `||L' x||` at the point, p.u.
    pub dual_norm: f64,
}

impl MembershipCheck {
    pub fn member(&self, tol: f64) -> bool {
        self.margin >= -tol
    }
}

impl OpfModel {
    /// Evaluates every constraint's `(x, ell, u)` at `primal` and measures it
    /// against the exact robust set (not the polyhedral approximation).
    ///
    /// The band is first widened by `band_tol` (p.u.) on each side: a solver
    /// leaves active rows violated by rounding, and on rows with an almost
    /// zero `||L' x||` standardization would blow that up. Points on a
    /// polyline vertex sit on the level curve, so callers should also allow
    /// a small negative margin.
    pub fn membership(
        &self,
        primal: &[f64],
        moments: &MomentEstimate,
        band_tol: f64,
    ) -> Result<Vec<MembershipCheck>> {
        let pu = moments.rescaled(self.base_mva);
        self.drccs
            .iter()
            .map(|r| {
                let spec = RiskSpec::new(r.epsilon, r.delta)?;
                let x = DVector::from_iterator(r.x.len(), r.x.iter().map(|e| e.eval(primal)));
                let (ell, u) = (r.ell.eval(primal) - band_tol, r.u.eval(primal) + band_tol);
                let shift = x.dot(&pu.mean);
                let dual_norm = (pu.factor.transpose() * &x).norm();
                let margin = if dual_norm == 0.0 {
                    // Deterministic row: distance inside the band.
                    (shift - ell).min(u - shift)
                } else {
                    let band = Band::new((ell - shift) / dual_norm, (u - shift) / dual_norm);
                    eval_g(&spec, band)? - r.delta
                };
                Ok(MembershipCheck {
                    id: r.id,
                    margin,
                    dual_norm,
                })
            })
            .collect()
    }

    /// Number of cone blocks and linear rows emitted for chance constraints.
    pub fn drcc_counts(&self) -> (usize, usize) {
        let rows = self.drccs.iter().map(|r| r.handle.ineq_rows.len()).sum();
        (self.drccs.len(), rows)
    }
}
