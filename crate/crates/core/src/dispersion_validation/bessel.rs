//! `J₀` three ways: adaptive quadrature of the integral representation,
//! Miller's backward recurrence, and a cubic Hermite table for bulk use.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::quadrature::gauss_legendre;

const GL_POINTS: usize = 16;
const ADAPT_TOL: f64 = 1e-14;
const MAX_DEPTH: u32 = 24;

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_POINTS))
}

fn gl(f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> Complex64 {
    let (x, w) = rule();
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut acc = Complex64::new(0.0, 0.0);
    for (xi, wi) in x.iter().zip(w) {
        acc += f(mid + half * xi) * *wi;
    }
    acc * half
}

fn adapt(f: &impl Fn(f64) -> Complex64, a: f64, b: f64, whole: Complex64, tol: f64, depth: u32) -> Complex64 {
    let m = 0.5 * (a + b);
    let (left, right) = (gl(f, a, m), gl(f, m, b));
    let split = left + right;
    // below ~roundoff of a 16-term sum nothing more can be gained
    let floor = 64.0 * f64::EPSILON * (b - a) * split.norm().max(1.0);
    if depth >= MAX_DEPTH || (split - whole).norm() <= tol.max(floor) {
        return split;
    }
    adapt(f, a, m, left, 0.5 * tol, depth + 1) + adapt(f, m, b, right, 0.5 * tol, depth + 1)
}

/// Adaptive Gauss–Legendre integral of a complex function on `[a, b]`.
pub fn adaptive_integral(f: impl Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Complex64 {
    adapt(&f, a, b, gl(&f, a, b), tol, 0)
}

/// `f(r) = (2π)^{−1} ∫_{−π}^{π} e^{−i r cos p} dp`, which equals `J₀(r)`.
pub fn bessel_f(r: f64) -> Complex64 {
    if r == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    // pre-split so each starting panel holds at most ~one oscillation
    let panels = (r.abs() / 2.0).ceil().max(1.0) as usize;
    let h = 2.0 * PI / panels as f64;
    let integrand = |p: f64| Complex64::from_polar(1.0, -r * p.cos());
    let tol = ADAPT_TOL / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..panels {
        let a = -PI + i as f64 * h;
        acc += adaptive_integral(integrand, a, a + h, tol);
    }
    acc / (2.0 * PI)
}

/// `(J₀(r), J₁(r))` by Miller's backward recurrence normalized with
/// `J₀ + 2 Σ J₂ₖ = 1`.
pub fn bessel_j01_series(r: f64) -> (f64, f64) {
    let x = r.abs();
    if x < 1e-8 {
        return (1.0 - 0.25 * x * x, 0.5 * r);
    }
    let mut m = (x + 20.0 + 10.0 * x.sqrt()) as usize;
    m += m % 2;
    // (jk, jp1) = (J_k, J_{k+1}) up to a common scale
    let (mut jk, mut jp1) = (1e-300f64, 0.0f64);
    let mut even_sum = 0.0;
    for k in (1..=m).rev() {
        let jm1 = 2.0 * k as f64 / x * jk - jp1;
        jp1 = jk;
        jk = jm1;
        if (k - 1) % 2 == 0 && k > 1 {
            even_sum += 2.0 * jk;
        }
        if jk.abs() > 1e250 {
            jk *= 1e-250;
            jp1 *= 1e-250;
            even_sum *= 1e-250;
        }
    }
    let norm = even_sum + jk;
    let j1 = jp1 / norm;
    (jk / norm, if r < 0.0 { -j1 } else { j1 })
}

pub fn bessel_j0_series(r: f64) -> f64 {
    bessel_j01_series(r).0
}

/// Cubic Hermite table of `J₀` on `[0, r_max]` using `J₀′ = −J₁`; falls back
/// to the series beyond the table.
#[derive(Debug, Clone)]
pub struct BesselTable {
    inv_h: f64,
    h: f64,
    j0: Vec<f64>,
    dj0: Vec<f64>,
}

impl BesselTable {
    pub fn new(r_max: f64, h: f64) -> Self {
        let n = (r_max / h).ceil() as usize + 2;
        let (j0, dj0) = (0..n)
            .map(|i| {
                let (a, b) = bessel_j01_series(i as f64 * h);
                (a, -b)
            })
            .unzip();
        Self {
            inv_h: 1.0 / h,
            h,
            j0,
            dj0,
        }
    }

    pub fn r_max(&self) -> f64 {
        (self.j0.len() - 2) as f64 * self.h
    }

    #[inline]
    pub fn j0(&self, r: f64) -> f64 {
        let x = r.abs() * self.inv_h;
        let i = x as usize;
        if i + 1 >= self.j0.len() {
            return bessel_j0_series(r);
        }
        let t = x - i as f64;
        let (p0, p1) = (self.j0[i], self.j0[i + 1]);
        let (m0, m1) = (self.dj0[i] * self.h, self.dj0[i + 1] * self.h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * p0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * p1 + (t3 - t2) * m1
    }
}
