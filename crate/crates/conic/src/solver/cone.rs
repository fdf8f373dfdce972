//! Cone algebra for `K = R_+^l x Q^{q_1} x ... x Q^{q_k}`.
//!
//! Vectors in `K` are stored flat: the `l` orthant entries first, then each
//! second-order block as `(x0, x1)` with `x0 >= ||x1||`.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeDims {
    pub linear: usize,
    pub soc: Vec<usize>,
}

impl ConeDims {
    pub fn total(&self) -> usize {
        self.linear + self.soc.iter().sum::<usize>()
    }

    /// Barrier degree: one per orthant entry and one per cone block.
    pub fn degree(&self) -> usize {
        self.linear + self.soc.len()
    }

    /// Start offsets of the second-order blocks.
    pub fn soc_offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.soc.len());
        let mut at = self.linear;
        for &d in &self.soc {
            out.push(at);
            at += d;
        }
        out
    }

    /// The identity element `e`.
    pub fn identity(&self) -> DVector<f64> {
        let mut e = DVector::zeros(self.total());
        for i in 0..self.linear {
            e[i] = 1.0;
        }
        for off in self.soc_offsets() {
            e[off] = 1.0;
        }
        e
    }

    /// Smallest "eigenvalue": `min x_i` on the orthant, `x0 - ||x1||` per block.
    pub fn min_eig(&self, x: &DVector<f64>) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.linear {
            m = m.min(x[i]);
        }
        for (off, &d) in self.soc_offsets().iter().zip(&self.soc) {
            m = m.min(x[*off] - tail_norm(x, *off, d));
        }
        m
    }

    /// Jordan product `x o y`.
    pub fn product(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(x.len());
        for i in 0..self.linear {
            out[i] = x[i] * y[i];
        }
        for (off, &d) in self.soc_offsets().iter().zip(&self.soc) {
            let (o, d) = (*off, d);
            out[o] = x.rows(o, d).dot(&y.rows(o, d));
            for k in 1..d {
                out[o + k] = x[o] * y[o + k] + y[o] * x[o + k];
            }
        }
        out
    }

    /// Solves `lambda o u = b` for `u`.
    pub fn divide(&self, lambda: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        let mut u = DVector::zeros(b.len());
        for i in 0..self.linear {
            u[i] = b[i] / lambda[i];
        }
        for (off, &d) in self.soc_offsets().iter().zip(&self.soc) {
            let o = *off;
            let l0 = lambda[o];
            let l1 = lambda.rows(o + 1, d - 1);
            let b1 = b.rows(o + 1, d - 1);
            let det = l0 * l0 - l1.norm_squared();
            let u0 = (l0 * b[o] - l1.dot(&b1)) / det;
            u[o] = u0;
            for k in 1..d {
                u[o + k] = (b[o + k] - u0 * lambda[o + k]) / l0;
            }
        }
        u
    }

    /// Largest `alpha` with `x + alpha dx` in the cone, for `x` interior.
    /// Returns infinity when the ray never leaves the cone.
    pub fn max_step(&self, x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
        let mut alpha = f64::INFINITY;
        for i in 0..self.linear {
            if dx[i] < 0.0 {
                alpha = alpha.min(-x[i] / dx[i]);
            }
        }
        for (off, &d) in self.soc_offsets().iter().zip(&self.soc) {
            let o = *off;
            let xs = x.rows(o + 1, d - 1);
            let ds = dx.rows(o + 1, d - 1);
            let a = dx[o] * dx[o] - ds.norm_squared();
            let b = x[o] * dx[o] - xs.dot(&ds);
            let c = (x[o] * x[o] - xs.norm_squared()).max(0.0);
            alpha = alpha.min(first_positive_root(a, b, c));
        }
        alpha
    }
}

fn tail_norm(x: &DVector<f64>, off: usize, d: usize) -> f64 {
    x.rows(off + 1, d - 1).norm()
}

/// Smallest positive root of `a t^2 + 2 b t + c` with `c >= 0`.
fn first_positive_root(a: f64, b: f64, c: f64) -> f64 {
    if c == 0.0 {
        // On the boundary already: any direction pointing outward blocks.
        return if b < 0.0 || (b == 0.0 && a < 0.0) { 0.0 } else { f64::INFINITY };
    }
    let scale = a.abs().max(b.abs()).max(c);
    if a.abs() <= 1e-14 * scale {
        return if b < 0.0 { -c / (2.0 * b) } else { f64::INFINITY };
    }
    let disc = b * b - a * c;
    if disc < 0.0 {
        return f64::INFINITY;
    }
    let q = -(b + b.signum() * disc.sqrt());
    let mut best = f64::INFINITY;
    for r in [q / a, if q != 0.0 { c / q } else { f64::INFINITY }] {
        if r > 0.0 && r < best {
            best = r;
        }
    }
    best
}

/// Nesterov–Todd scaling `W` with `W z = W^{-1} s = lambda`.
#[derive(Debug, Clone)]
pub struct NtScaling {
    /// Orthant part: `d_i = sqrt(s_i / z_i)`.
    d: Vec<f64>,
    /// Per cone block: `(eta, wbar)`.
    blocks: Vec<(f64, DVector<f64>)>,
    dims: ConeDims,
}

impl NtScaling {
    /// Requires `s` and `z` strictly interior.
    pub fn new(dims: &ConeDims, s: &DVector<f64>, z: &DVector<f64>) -> Self {
        let d = (0..dims.linear).map(|i| (s[i] / z[i]).sqrt()).collect();
        let mut blocks = Vec::with_capacity(dims.soc.len());
        for (off, &dim) in dims.soc_offsets().iter().zip(&dims.soc) {
            let sb = s.rows(*off, dim).into_owned();
            let zb = z.rows(*off, dim).into_owned();
            let sn = jnorm(&sb);
            let zn = jnorm(&zb);
            let sbar = sb / sn;
            let zbar = zb / zn;
            let gamma = ((1.0 + sbar.dot(&zbar)) / 2.0).sqrt();
            let mut w = sbar.clone();
            w[0] += zbar[0];
            for k in 1..dim {
                w[k] -= zbar[k];
            }
            w /= 2.0 * gamma;
            // Keep w on the unit hyperboloid despite rounding.
            w[0] = (1.0 + w.rows(1, dim - 1).norm_squared()).sqrt();
            blocks.push(((sn / zn).sqrt(), w));
        }
        Self {
            d,
            blocks,
            dims: dims.clone(),
        }
    }

    fn apply_impl(&self, v: &DVector<f64>, inverse: bool) -> DVector<f64> {
        let mut out = DVector::zeros(v.len());
        for (i, &di) in self.d.iter().enumerate() {
            out[i] = if inverse { v[i] / di } else { v[i] * di };
        }
        for ((off, &dim), (eta, w)) in self
            .dims
            .soc_offsets()
            .iter()
            .zip(&self.dims.soc)
            .zip(&self.blocks)
        {
            let o = *off;
            let v0 = v[o];
            let v1 = v.rows(o + 1, dim - 1);
            let w1 = w.rows(1, dim - 1);
            // W v = eta [w0 v0 + w1'v1; v0 w1 + v1 + (w1'v1/(1+w0)) w1]
            // W^-1 v = (1/eta) [w0 v0 - w1'v1; -v0 w1 + v1 + (w1'v1/(1+w0)) w1]
            let wv = w1.dot(&v1);
            let (sign, scale) = if inverse { (-1.0, 1.0 / eta) } else { (1.0, *eta) };
            out[o] = scale * (w[0] * v0 + sign * wv);
            let c = sign * v0 + wv / (1.0 + w[0]);
            for k in 1..dim {
                out[o + k] = scale * (v[o + k] + c * w[k]);
            }
        }
        out
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self.apply_impl(v, false)
    }

    pub fn apply_inv(&self, v: &DVector<f64>) -> DVector<f64> {
        self.apply_impl(v, true)
    }

    /// `W^{-2}` restricted to orthant entry `i`.
    pub fn inv_sq_linear(&self, i: usize) -> f64 {
        1.0 / (self.d[i] * self.d[i])
    }

    /// `W^{-1}` restricted to orthant entry `i`.
    pub fn inv_linear(&self, i: usize) -> f64 {
        1.0 / self.d[i]
    }

    /// Dense `W^{-1}` block of cone `k`.
    pub fn inv_block(&self, k: usize) -> DMatrix<f64> {
        let (eta, w) = &self.blocks[k];
        let dim = w.len();
        let mut m = DMatrix::zeros(dim, dim);
        m[(0, 0)] = w[0];
        for i in 1..dim {
            m[(0, i)] = -w[i];
            m[(i, 0)] = -w[i];
            for j in 1..dim {
                m[(i, j)] = w[i] * w[j] / (1.0 + w[0]);
            }
            m[(i, i)] += 1.0;
        }
        m / *eta
    }

    /// Dense `W^{-2}` block of cone `k`: `(2 (Jw)(Jw)' - J) / eta^2`.
    pub fn inv_sq_block(&self, k: usize) -> DMatrix<f64> {
        let (eta, w) = &self.blocks[k];
        let dim = w.len();
        let mut jw = w.clone();
        for i in 1..dim {
            jw[i] = -jw[i];
        }
        let mut m = 2.0 * &jw * jw.transpose();
        m[(0, 0)] -= 1.0;
        for i in 1..dim {
            m[(i, i)] += 1.0;
        }
        m / (eta * eta)
    }

    /// `W^2 v`.
    pub fn apply_sq(&self, v: &DVector<f64>) -> DVector<f64> {
        self.apply(&self.apply(v))
    }
}

/// `sqrt(x0^2 - ||x1||^2)`.
fn jnorm(x: &DVector<f64>) -> f64 {
    let t = x.rows(1, x.len() - 1).norm();
    ((x[0] - t) * (x[0] + t)).max(0.0).sqrt()
}
