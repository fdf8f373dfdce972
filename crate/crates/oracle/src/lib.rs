//! Slow, independent reference numerics for tests.
//!
//! Nothing here shares code with the library crates: the Gaussian CDF is a
//! positive-term erf series, quadrature is plain adaptive Simpson, and
//! inversion is bisection. Tests compare the fast semi-analytic paths
//! against these.

use std::f64::consts::PI;

/// erf(x) for x >= 0 via `2/sqrt(pi) * exp(-x^2) * sum 2^n x^(2n+1) / (2n+1)!!`.
///
/// All terms are positive so there is no cancellation.
fn erf_series(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    if x > 6.0 {
        return 1.0;
    }
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
        if term < sum * 1e-18 || n > 2000.0 {
            break;
        }
    }
    2.0 / PI.sqrt() * (-x2).exp() * sum
}

/// Standard normal CDF from the erf series.
pub fn normal_cdf(z: f64) -> f64 {
    if z == f64::INFINITY {
        return 1.0;
    }
    if z == f64::NEG_INFINITY {
        return 0.0;
    }
    let e = erf_series(z.abs() / 2f64.sqrt());
    if z >= 0.0 {
        0.5 * (1.0 + e)
    } else {
        0.5 * (1.0 - e)
    }
}

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Quantile by plain bisection on [`normal_cdf`].
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0);
    bisect(|z| normal_cdf(z) - p, -40.0, 40.0, 1e-15)
}

/// Root of an increasing function on `[lo, hi]` by bisection.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, xtol: f64) -> f64 {
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= xtol {
            return mid;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `g_eps(l, u)` by direct quadrature of the positive-part integrand.
///
/// Splits the domain at a bisected kink so Simpson never straddles it.
pub fn g_quadrature(eps: f64, l: f64, u: f64) -> f64 {
    let integrand = |t: f64| (normal_cdf(u - t) - normal_cdf(l + t) - (1.0 - eps)).max(0.0);
    if l == f64::NEG_INFINITY || u == f64::INFINITY {
        return tail_quadrature(eps, l, u);
    }
    let half = 0.5 * (u - l);
    if half <= 0.0 || integrand(0.0) <= 0.0 {
        return 0.0;
    }
    let kink = bisect(
        |t| -(normal_cdf(u - t) - normal_cdf(l + t) - (1.0 - eps)),
        0.0,
        half,
        1e-15,
    );
    simpson(&integrand, 0.0, kink, 1e-13)
}

fn tail_quadrature(eps: f64, l: f64, u: f64) -> f64 {
    if l == f64::NEG_INFINITY && u == f64::INFINITY {
        return f64::INFINITY;
    }
    // g(-inf, u) = int (Phi(u - t) - (1 - eps))^+ ; g(l, inf) is its mirror.
    let u = if l == f64::NEG_INFINITY { u } else { -l };
    let integrand = |t: f64| (normal_cdf(u - t) - (1.0 - eps)).max(0.0);
    let q = normal_quantile(1.0 - eps);
    if u <= q {
        return 0.0;
    }
    simpson(&integrand, 0.0, u - q, 1e-13)
}

/// Maximum of `f` over `[a, b]` by dense sampling followed by local
/// refinement around the best sample.
pub fn dense_max(f: impl Fn(f64) -> f64, a: f64, b: f64, samples: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    let mut best_x = a;
    for k in 0..=samples {
        let x = a + (b - a) * k as f64 / samples as f64;
        let v = f(x);
        if v > best {
            best = v;
            best_x = x;
        }
    }
    let h = (b - a) / samples as f64;
    let lo = (best_x - h).max(a);
    let hi = (best_x + h).min(b);
    for k in 0..=200 {
        let x = lo + (hi - lo) * k as f64 / 200.0;
        best = best.max(f(x));
    }
    best
}

/// splitmix64, a tiny deterministic generator for test inputs.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform().max(1e-300);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }
}
