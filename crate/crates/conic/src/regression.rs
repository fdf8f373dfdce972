//! Problems with optimal solutions known by construction.
//!
//! A primal-dual point `(x*, y*, z*, s*)` is drawn first, with strict
//! complementarity chosen block by block, and the data `(q, b, h)` is then
//! solved for so that `x*` satisfies the KKT conditions. Convexity makes it
//! a global optimum, so the optimal value is exact.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::AffineExpr;
use crate::program::ConicProgram;

#[derive(Debug, Clone)]
pub struct ProblemShape {
    pub n: usize,
    pub equalities: usize,
    pub inequalities: usize,
    /// Dimensions (including the scalar) of each cone block.
    pub cones: Vec<usize>,
    /// Rank of the quadratic term: 0 for a pure conic LP, `n` for strictly
    /// convex.
    pub quadratic_rank: usize,
}

#[derive(Debug, Clone)]
pub struct ConstructedProblem {
    pub program: ConicProgram,
    pub x_star: Vec<f64>,
    pub optimum: f64,
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; only the quality of "generic" data matters here.
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn row(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| gauss(rng))
}

fn expr_of(coefs: &DVector<f64>, constant: f64) -> AffineExpr {
    AffineExpr::from_terms(coefs.iter().copied().enumerate(), constant)
}

pub fn construct(shape: &ProblemShape, seed: u64) -> ConstructedProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = shape.n;
    let mut prog = ConicProgram::new();
    prog.add_vars("x", n);
    let x = row(&mut rng, n);

    let m = DMatrix::from_fn(shape.quadratic_rank, n, |_, _| gauss(&mut rng));
    let p = m.transpose() * &m;
    // grad = P x* + A'y* + G'z*, accumulated as the constraints are drawn.
    let mut grad = &p * &x;

    for _ in 0..shape.equalities {
        let a = row(&mut rng, n);
        let y = gauss(&mut rng);
        grad += &a * y;
        prog.add_eq(expr_of(&a, -a.dot(&x)));
    }
    for _ in 0..shape.inequalities {
        let g = row(&mut rng, n);
        let active = rng.random_bool(0.5);
        let mag = rng.random_range(0.5..2.0);
        let (s, z) = if active { (0.0, mag) } else { (mag, 0.0) };
        grad += &g * z;
        // g'x - h <= 0 with slack s at x*.
        prog.add_le(expr_of(&g, -(g.dot(&x) + s)));
    }
    for &d in &shape.cones {
        let v = {
            let r = row(&mut rng, d - 1);
            r.normalize()
        };
        let a = rng.random_range(0.5..2.0);
        let b = rng.random_range(0.5..2.0);
        let (s, z) = match rng.random_range(0..3) {
            0 => {
                let mut s = DVector::zeros(d);
                s.rows_mut(1, d - 1).copy_from(&(&v * a));
                s[0] = a + b;
                (s, DVector::zeros(d))
            }
            1 => {
                let mut z = DVector::zeros(d);
                z.rows_mut(1, d - 1).copy_from(&(&v * b));
                z[0] = a + b;
                (DVector::zeros(d), z)
            }
            _ => {
                let mut s = DVector::zeros(d);
                let mut z = DVector::zeros(d);
                s[0] = a;
                z[0] = b;
                s.rows_mut(1, d - 1).copy_from(&(&v * a));
                z.rows_mut(1, d - 1).copy_from(&(&v * -b));
                (s, z)
            }
        };
        // Cone entries are c_k'x + k_k = s_k at x*; in standard form G = -C.
        let exprs: Vec<AffineExpr> = (0..d)
            .map(|k| {
                let c = row(&mut rng, n);
                grad -= &c * z[k];
                expr_of(&c, s[k] - c.dot(&x))
            })
            .collect();
        prog.add_soc(exprs[1..].to_vec(), exprs[0].clone());
    }

    let q = -grad;
    for i in 0..n {
        prog.add_linear_cost(i, q[i]);
        if shape.quadratic_rank > 0 {
            prog.add_quadratic_cost(i, i, 0.5 * p[(i, i)]);
            for j in i + 1..n {
                prog.add_quadratic_cost(i, j, p[(i, j)]);
            }
        }
    }
    let optimum = 0.5 * x.dot(&(&p * &x)) + q.dot(&x);
    ConstructedProblem {
        program: prog,
        x_star: x.iter().copied().collect(),
        optimum,
    }
}

/// Twenty mixed SOCP/QP/LP instances used as the solver regression suite.
pub fn regression_suite() -> Vec<ConstructedProblem> {
    let shapes = [
        (5, 1, 3, vec![3], 0),
        (5, 0, 2, vec![4], 5),
        (5, 2, 4, vec![3, 3], 2),
        (6, 1, 6, vec![], 6),
        (6, 0, 0, vec![5, 3], 0),
        (8, 2, 5, vec![4], 8),
        (8, 3, 10, vec![3, 4, 5], 0),
        (10, 2, 12, vec![6], 4),
        (10, 0, 8, vec![2, 2, 3], 10),
        (12, 4, 15, vec![5, 5], 0),
        (12, 1, 20, vec![], 12),
        (15, 3, 10, vec![4, 4, 4], 7),
        (15, 5, 25, vec![8], 15),
        (20, 4, 30, vec![5, 6], 0),
        (20, 2, 15, vec![10, 3], 20),
        (25, 6, 35, vec![4, 4, 4, 4], 10),
        (30, 5, 40, vec![12], 30),
        (30, 8, 20, vec![6, 6, 6], 0),
        (40, 10, 50, vec![5, 5, 5, 5, 5], 40),
        (50, 10, 60, vec![15, 10], 25),
    ];
    shapes
        .into_iter()
        .enumerate()
        .map(|(k, (n, equalities, inequalities, cones, quadratic_rank))| {
            construct(
                &ProblemShape {
                    n,
                    equalities,
                    inequalities,
                    cones,
                    quadratic_rank,
                },
                1000 + k as u64,
            )
        })
        .collect()
}
