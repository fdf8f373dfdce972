//! Primal-dual interior-point method for quadratic cone programs.
//!
//! Infeasible-start path following with Nesterov–Todd scaling and a
//! Mehrotra predictor-corrector. Each iteration factors one dense KKT
//! matrix (LU) and reuses it for both the affine and the combined step.
//! Infeasibility is reported from certificate ratios on the iterates rather
//! than a homogeneous embedding. When the iterates stall short of
//! feasibility, a Phase-I problem decides between `Infeasible` and
//! `MaxIter`; in the latter case the best iterate is returned.

mod cone;
mod standard;

pub use cone::{ConeDims, NtScaling};
pub use standard::StandardForm;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{ConicError, Result};
use crate::expr::AffineExpr;
use crate::program::ConicProgram;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub tol: f64,
    pub max_iter: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
    /// Print one line per iteration to stderr.
    pub verbose: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 100,
            step_fraction: 0.99,
            verbose: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
}

/// Relative KKT residuals: primal feasibility, stationarity, and the
/// complementarity gap `s'z / (1 + |objective|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

impl KktResiduals {
    fn worst(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub status: Status,
    pub primal: Vec<f64>,
    pub objective_value: f64,
    pub kkt_residuals: KktResiduals,
    /// Multipliers of the equality rows.
    pub eq_duals: Vec<f64>,
    /// Multipliers (>= 0) of the inequality rows.
    pub ineq_duals: Vec<f64>,
    /// Dual cone vectors, ordered `(scalar, vector...)` per block.
    pub soc_duals: Vec<Vec<f64>>,
    pub iterations: usize,
}

/// Solves with default settings and the given tolerance.
pub fn solve(prog: &ConicProgram, tol: f64) -> Result<Solution> {
    solve_with(
        prog,
        &Settings {
            tol,
            ..Settings::default()
        },
    )
}

pub fn solve_with(prog: &ConicProgram, settings: &Settings) -> Result<Solution> {
    prog.validate()?;
    let sf = StandardForm::from_program(prog);
    let mut ipm = Ipm::new(&sf, settings);
    let state = ipm.run()?;
    let mut sol = state.into_solution(&sf);
    if sol.status == Status::MaxIter && sol.kkt_residuals.primal > settings.tol.sqrt() {
        if let Some(t) = phase_one(prog, settings)? {
            if t > PHASE_ONE_MARGIN {
                sol.status = Status::Infeasible;
            }
        }
    }
    Ok(sol)
}

/// Optimal Phase-I relaxation above which a stalled solve is declared
/// infeasible.
const PHASE_ONE_MARGIN: f64 = 1e-6;

/// `min t` over the program's constraints relaxed by `t` along the cone
/// identity (each `expr <= t`, each `||v|| <= scalar + t`), with `t >= -1`.
///
/// The relaxation is strictly feasible for large `t`, so the interior-point
/// method behaves even when the original program has no feasible point;
/// a positive optimum certifies infeasibility of the original cone
/// constraints. Returns `None` when Phase I itself does not converge.
fn phase_one(prog: &ConicProgram, settings: &Settings) -> Result<Option<f64>> {
    let mut aux = ConicProgram::new();
    aux.num_vars = prog.num_vars;
    aux.var_names = prog.var_names.clone();
    aux.equalities = prog.equalities.clone();
    let t = aux.add_var("phase_one_t");
    let relax = AffineExpr::var(t);
    for e in &prog.inequalities {
        aux.add_le(e.clone() - relax.clone());
    }
    for b in &prog.soc_blocks {
        aux.add_soc(b.vector.clone(), b.scalar.clone() + relax.clone());
    }
    aux.add_le(AffineExpr::from_terms([(t, -1.0)], -1.0));
    aux.add_linear_cost(t, 1.0);
    let sf = StandardForm::from_program(&aux);
    let mut ipm = Ipm::new(&sf, settings);
    let out = ipm.run()?.into_solution(&sf);
    Ok((out.status == Status::Optimal).then(|| out.primal[t]))
}

#[derive(Clone)]
struct Iterate {
    x: DVector<f64>,
    y: DVector<f64>,
    z: DVector<f64>,
    s: DVector<f64>,
}

struct Outcome {
    status: Status,
    it: Iterate,
    res: KktResiduals,
    iterations: usize,
}

impl Outcome {
    fn into_solution(self, sf: &StandardForm) -> Solution {
        let Iterate { x, y, z, .. } = self.it;
        let l = sf.dims.linear;
        let soc_duals = sf
            .dims
            .soc_offsets()
            .iter()
            .zip(&sf.dims.soc)
            .map(|(&o, &d)| z.rows(o, d).iter().copied().collect())
            .collect();
        Solution {
            status: self.status,
            objective_value: sf.objective(&x),
            primal: x.iter().copied().collect(),
            kkt_residuals: self.res,
            eq_duals: y.iter().copied().collect(),
            ineq_duals: z.rows(0, l).iter().copied().collect(),
            soc_duals,
            iterations: self.iterations,
        }
    }
}

struct Ipm<'a> {
    sf: &'a StandardForm,
    settings: &'a Settings,
    /// Per cone block: the columns touched and the dense block of `G`.
    soc_blocks: Vec<(Vec<usize>, DMatrix<f64>)>,
}

/// Factored reduced KKT matrix `[P + G'W^-2 G, A'; A, 0]` (regularized).
struct Kkt {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    /// Symmetric equilibration: the factored matrix is `D K D`.
    d: DVector<f64>,
}

impl Kkt {
    fn solve(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        let scaled = rhs.component_mul(&self.d);
        let y = self.lu.solve(&scaled).ok_or(ConicError::SingularKkt)?;
        Ok(y.component_mul(&self.d))
    }
}

/// Ruiz scaling: a few passes of `D <- D / sqrt(max_j |(D K D)_ij|)`.
/// Near the optimum `G'W^-2 G` spans many orders of magnitude and LU on
/// the unscaled matrix loses most of its accuracy.
fn equilibrate(k: &mut DMatrix<f64>) -> DVector<f64> {
    let n = k.nrows();
    let mut d = DVector::from_element(n, 1.0);
    for _ in 0..8 {
        let mut step = DVector::from_element(n, 1.0);
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let m = k.column(j).amax();
            if m > 0.0 {
                step[j] = 1.0 / m.sqrt();
                worst = worst.max((1.0 - m).abs());
            }
        }
        for j in 0..n {
            for i in 0..n {
                k[(i, j)] *= step[i] * step[j];
            }
        }
        d.component_mul_assign(&step);
        if worst < 0.1 {
            break;
        }
    }
    d
}

struct Direction {
    dx: DVector<f64>,
    dy: DVector<f64>,
    dz: DVector<f64>,
    ds: DVector<f64>,
}

impl<'a> Ipm<'a> {
    fn new(sf: &'a StandardForm, settings: &'a Settings) -> Self {
        let mut soc_blocks = Vec::with_capacity(sf.dims.soc.len());
        for (&off, &d) in sf.dims.soc_offsets().iter().zip(&sf.dims.soc) {
            let mut cols: Vec<usize> = sf.g[off..off + d]
                .iter()
                .flat_map(|r| r.iter().map(|t| t.0))
                .collect();
            cols.sort_unstable();
            cols.dedup();
            let mut dense = DMatrix::zeros(d, cols.len());
            for (r, row) in sf.g[off..off + d].iter().enumerate() {
                for &(j, c) in row {
                    let k = cols.binary_search(&j).unwrap();
                    dense[(r, k)] += c;
                }
            }
            soc_blocks.push((cols, dense));
        }
        Self {
            sf,
            settings,
            soc_blocks,
        }
    }

    fn factor(&self, w: &NtScaling) -> Result<Kkt> {
        let sf = self.sf;
        let (n, p) = (sf.n, sf.a.len());
        let mut k = DMatrix::zeros(n + p, n + p);
        k.view_mut((0, 0), (n, n)).copy_from(&sf.p);
        // G'W^-2 G assembled as (W^-1 G)'(W^-1 G) so it stays PSD.
        for (i, row) in sf.g[..sf.dims.linear].iter().enumerate() {
            let wi = w.inv_linear(i);
            for &(a, ca) in row {
                for &(b, cb) in row {
                    k[(a, b)] += (wi * ca) * (wi * cb);
                }
            }
        }
        for (blk, (cols, gk)) in self.soc_blocks.iter().enumerate() {
            let scaled = w.inv_block(blk) * gk;
            let t = scaled.transpose() * &scaled;
            for (a, &ca) in cols.iter().enumerate() {
                for (b, &cb) in cols.iter().enumerate() {
                    k[(ca, cb)] += t[(a, b)];
                }
            }
        }
        for (i, row) in sf.a.iter().enumerate() {
            for &(j, c) in row {
                k[(n + i, j)] += c;
                k[(j, n + i)] += c;
            }
        }
        // Small static regularization; refinement against the exact operator
        // removes its effect on the computed direction. It is relative per
        // entry: a shift tied to the largest diagonal would swamp the small
        // ones once G'W^-2 G grows near the optimum.
        for i in 0..n {
            k[(i, i)] += 1e-14 * k[(i, i)].abs().max(1.0);
        }
        for i in n..n + p {
            k[(i, i)] -= 1e-12;
        }
        let d = equilibrate(&mut k);
        let lu = k.lu();
        if !lu.is_invertible() {
            return Err(ConicError::SingularKkt);
        }
        Ok(Kkt { lu, d })
    }

    /// `[P dx + A'dy + G'W^-2 G dx; A dx]`, the unregularized reduced
    /// operator applied without forming it.
    fn apply_reduced(&self, w: &NtScaling, v: &DVector<f64>) -> DVector<f64> {
        let sf = self.sf;
        let n = sf.n;
        let dx = v.rows(0, n).into_owned();
        let dy = v.rows(n, sf.a.len()).into_owned();
        let top = &sf.p * &dx
            + sf.mul_at(&dy)
            + sf.mul_gt(&w.apply_inv(&w.apply_inv(&sf.mul_g(&dx))));
        let mut out = DVector::zeros(v.len());
        out.rows_mut(0, n).copy_from(&top);
        out.rows_mut(n, sf.a.len()).copy_from(&sf.mul_a(&dx));
        out
    }

    /// Newton direction for residuals `(rx, ry, rz)` and scaled
    /// complementarity target `u = lambda \ bs`.
    fn direction(
        &self,
        kkt: &Kkt,
        w: &NtScaling,
        rx: &DVector<f64>,
        ry: &DVector<f64>,
        rz: &DVector<f64>,
        u: &DVector<f64>,
    ) -> Result<Direction> {
        let sf = self.sf;
        let n = sf.n;
        // W^-2 (rz + W u) = W^-1 (W^-1 rz + u)
        let t = w.apply_inv(&(w.apply_inv(rz) + u));
        let top = -rx - sf.mul_gt(&t);
        let mut rhs = DVector::zeros(n + sf.a.len());
        rhs.rows_mut(0, n).copy_from(&top);
        rhs.rows_mut(n, sf.a.len()).copy_from(&(-ry));
        let mut sol = kkt.solve(&rhs)?;
        let (top_scale, bottom_scale) = (
            1.0 + rhs.rows(0, n).amax(),
            1.0 + rhs.rows(n, sf.a.len()).amax(),
        );
        let mut last = f64::INFINITY;
        for _ in 0..10 {
            let r = &rhs - self.apply_reduced(w, &sol);
            let top = r.rows(0, n).amax() / top_scale;
            let bottom = if sf.a.is_empty() {
                0.0
            } else {
                r.rows(n, sf.a.len()).amax() / bottom_scale
            };
            // Stop when accurate, or once rounding in the residual itself
            // stops further progress.
            let worst = top.max(bottom);
            if (top <= 1e-14 && bottom <= 1e-15) || worst > 0.5 * last {
                break;
            }
            last = worst;
            sol += kkt.solve(&r)?;
        }
        let dx = sol.rows(0, n).into_owned();
        let dy = sol.rows(n, sf.a.len()).into_owned();
        let dz = w.apply_inv(&(w.apply_inv(&(sf.mul_g(&dx) + rz)) + u));
        // From G dx + ds = -rz rather than ds = W(u - W dz): the latter
        // loses accuracy as W becomes ill-conditioned near the boundary.
        let ds = -rz - sf.mul_g(&dx);
        if !(dx.iter().chain(dz.iter()).all(|v| v.is_finite())) {
            return Err(ConicError::SingularKkt);
        }
        Ok(Direction { dx, dy, dz, ds })
    }

    fn trace(&self, args: std::fmt::Arguments) {
        if self.settings.verbose {
            eprintln!("{args}");
        }
    }

    fn initial_point(&self) -> Result<Iterate> {
        let sf = self.sf;
        let dims = &sf.dims;
        let m = dims.total();
        let e = dims.identity();
        let unit = NtScaling::new(dims, &e, &e);
        let kkt = self.factor(&unit)?;
        let d = self.direction(
            &kkt,
            &unit,
            &sf.q,
            &(-&sf.b),
            &(-&sf.h),
            &DVector::zeros(m),
        )?;
        let x = d.dx;
        let mut s = &sf.h - sf.mul_g(&x);
        let mut z = -s.clone();
        for v in [&mut s, &mut z] {
            let t = -dims.min_eig(v);
            if m > 0 && t >= -1e-8 * v.norm().max(1.0) {
                *v += (1.0 + t) * &e;
            }
        }
        Ok(Iterate { x, y: d.dy, z, s })
    }

    fn run(&mut self) -> Result<Outcome> {
        let sf = self.sf;
        let dims = &sf.dims;
        let tol = self.settings.tol;
        let degree = dims.degree();
        let e = dims.identity();
        let (nb, nh, nq) = (sf.b.norm(), sf.h.norm(), sf.q.norm());

        let mut it = self.initial_point()?;
        let mut best: Option<(Iterate, KktResiduals)> = None;
        let mut count = 0;
        let mut stalled = 0;
        for iter in 0..=self.settings.max_iter {
            count = iter;
            let px = &sf.p * &it.x;
            let rx = &px + &sf.q + sf.mul_at(&it.y) + sf.mul_gt(&it.z);
            let ry = sf.mul_a(&it.x) - &sf.b;
            let rz = sf.mul_g(&it.x) + &it.s - &sf.h;
            let gap = it.s.dot(&it.z);
            let pcost = sf.objective(&it.x);
            let res = KktResiduals {
                primal: (ry.norm() / (1.0 + nb)).max(rz.norm() / (1.0 + nh)),
                dual: rx.norm() / (1.0 + nq),
                gap: gap.max(0.0) / (1.0 + pcost.abs()),
            };
            self.trace(format_args!(
                "{iter:3} pcost {pcost:+.6e} pres {:.2e} dres {:.2e} gap {:.2e}",
                res.primal, res.dual, res.gap
            ));
            if !res.worst().is_finite() {
                break;
            }
            if best.as_ref().is_none_or(|b| res.worst() < b.1.worst()) {
                best = Some((it.clone(), res));
                stalled = 0;
            } else {
                stalled += 1;
                if stalled >= 8 {
                    self.trace(format_args!("stopping: no progress"));
                    break;
                }
            }
            if res.worst() <= tol {
                return Ok(Outcome {
                    status: Status::Optimal,
                    it,
                    res,
                    iterations: iter,
                });
            }

            // Certificates of infeasibility.
            let hz_by = sf.h.dot(&it.z) + sf.b.dot(&it.y);
            if hz_by < 0.0 {
                let r = (sf.mul_at(&it.y) + sf.mul_gt(&it.z)).norm();
                if r <= tol * -hz_by {
                    return Ok(Outcome {
                        status: Status::Infeasible,
                        it,
                        res,
                        iterations: iter,
                    });
                }
            }
            let qx = sf.q.dot(&it.x);
            if qx < 0.0 {
                let r = px
                    .norm()
                    .max(sf.mul_a(&it.x).norm())
                    .max((sf.mul_g(&it.x) + &it.s).norm());
                if r <= tol * -qx {
                    return Ok(Outcome {
                        status: Status::Unbounded,
                        it,
                        res,
                        iterations: iter,
                    });
                }
            }
            if iter == self.settings.max_iter {
                break;
            }

            let w = NtScaling::new(dims, &it.s, &it.z);
            let lambda = w.apply(&it.z);
            let kkt = match self.factor(&w) {
                Ok(k) => k,
                Err(e) => {
                    self.trace(format_args!("stopping: {e}"));
                    break;
                }
            };

            // Affine-scaling predictor: u = lambda \ (-lambda o lambda) = -lambda.
            let aff = match self.direction(&kkt, &w, &rx, &ry, &rz, &(-&lambda)) {
                Ok(d) => d,
                Err(e) => {
                    self.trace(format_args!("stopping: {e}"));
                    break;
                }
            };
            // Step lengths are measured in the scaled space, where
            // s + a ds in K  <=>  lambda + a W^-1 ds in K  (same for z with W dz).
            let ds_aff = w.apply_inv(&aff.ds);
            let dz_aff = w.apply(&aff.dz);
            let alpha_aff = dims
                .max_step(&lambda, &ds_aff)
                .min(dims.max_step(&lambda, &dz_aff))
                .min(1.0);
            let (sigma, mu) = if degree > 0 && gap > 0.0 {
                let s_a = &it.s + alpha_aff * &aff.ds;
                let z_a = &it.z + alpha_aff * &aff.dz;
                let ratio = (s_a.dot(&z_a) / gap).clamp(0.0, 1.0);
                (ratio.powi(3), gap / degree as f64)
            } else {
                (0.0, 0.0)
            };

            // Combined step with second-order correction.
            let corr = dims.product(&ds_aff, &dz_aff);
            let bs = -dims.product(&lambda, &lambda) - corr + sigma * mu * &e;
            let u = dims.divide(&lambda, &bs);
            let d = match self.direction(&kkt, &w, &rx, &ry, &rz, &u) {
                Ok(d) => d,
                Err(e) => {
                    self.trace(format_args!("stopping: {e}"));
                    break;
                }
            };
            let mut alpha = (self.settings.step_fraction
                * dims
                    .max_step(&lambda, &w.apply_inv(&d.ds))
                    .min(dims.max_step(&lambda, &w.apply(&d.dz))))
            .min(1.0);
            // Guard against rounding putting the new point on the boundary.
            let mut next = None;
            for _ in 0..30 {
                let s_new = &it.s + alpha * &d.ds;
                let z_new = &it.z + alpha * &d.dz;
                if degree == 0 || (dims.min_eig(&s_new) > 0.0 && dims.min_eig(&z_new) > 0.0) {
                    next = Some((s_new, z_new));
                    break;
                }
                alpha *= 0.5;
            }
            let Some((s_new, z_new)) = next else {
                self.trace(format_args!("stopping: no interior step"));
                break;
            };
            it.x += alpha * &d.dx;
            it.y += alpha * &d.dy;
            it.s = s_new;
            it.z = z_new;
        }
        let (it, res) = match best {
            Some(b) => b,
            None => return Err(ConicError::SingularKkt),
        };
        Ok(Outcome {
            status: Status::MaxIter,
            it,
            res,
            iterations: count,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `x <= upper`, `x >= 1` and `|x| <= 3`.
    fn bounds(upper: f64) -> ConicProgram {
        let mut p = ConicProgram::new();
        let x = p.add_var("x");
        p.add_le(AffineExpr::from_terms([(x, 1.0)], -upper));
        p.add_le(AffineExpr::from_terms([(x, -1.0)], 1.0));
        p.add_soc(vec![AffineExpr::var(x)], AffineExpr::constant(3.0));
        p.add_linear_cost(x, 1.0);
        p
    }

    #[test]
    fn phase_one_measures_infeasibility() {
        let s = Settings::default();
        // x <= 0.5 and x >= 1: the smallest uniform relaxation is 0.25.
        let t = phase_one(&bounds(0.5), &s).unwrap().unwrap();
        assert!((t - 0.25).abs() < 1e-7, "{t}");
        let t = phase_one(&bounds(2.0), &s).unwrap().unwrap();
        assert!(t <= 0.0);
    }
}
