//! Closed-form algebra on 2×2 complex matrices.
//!
//! Every Hermitian 2×2 matrix is written as `a·I + b·σ` with real `a` and a
//! real Bloch vector `b`; eigenvalues are `a ± |b|` and spectral projections
//! are `(I ± b̂·σ)/2`. All functions of matrices used by the solver (absolute
//! value, truncation, unitary exponentials) go through this decomposition or
//! through explicit 2×2 identities, never through iterative eigensolvers.

use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use rand::Rng;

use crate::error::{HbkError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default tolerance for Hermiticity checks (Hilbert–Schmidt norm).
pub const TOL_HERM: f64 = 1e-10;
/// Default tolerance for the Fermi constraint `0 ≤ M ≤ 1`.
pub const TOL_FERMI: f64 = 1e-10;

/// A 2×2 complex matrix, stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinMatrix {
    pub m: [[Complex64; 2]; 2],
}

/// Pauli decomposition `a·I + b·σ` of the Hermitian part of a matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bloch {
    pub a: f64,
    pub b: [f64; 3],
}

impl Bloch {
    pub fn radius(&self) -> f64 {
        let [x, y, z] = self.b;
        (x * x + y * y + z * z).sqrt()
    }

    /// Builds `f_plus·P₊ + f_minus·P₋` for the spectral projections of this
    /// decomposition, i.e. applies a scalar function given its values on the
    /// two eigenvalues.
    fn spectral(&self, f_plus: f64, f_minus: f64) -> SpinMatrix {
        let r = self.radius();
        let mean = 0.5 * (f_plus + f_minus);
        if r == 0.0 {
            return SpinMatrix::scalar(mean);
        }
        let half = 0.5 * (f_plus - f_minus) / r;
        SpinMatrix::from_bloch(Bloch {
            a: mean,
            b: [half * self.b[0], half * self.b[1], half * self.b[2]],
        })
    }
}

impl Default for SpinMatrix {
    fn default() -> Self {
        Self::zero()
    }
}

impl SpinMatrix {
    pub const fn new(m00: Complex64, m01: Complex64, m10: Complex64, m11: Complex64) -> Self {
        Self {
            m: [[m00, m01], [m10, m11]],
        }
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn scalar(x: f64) -> Self {
        Self::diag(x, x)
    }

    pub fn diag(x0: f64, x1: f64) -> Self {
        Self::new(x0.into(), ZERO, ZERO, x1.into())
    }

    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        Self::new(m[0][0].into(), m[0][1].into(), m[1][0].into(), m[1][1].into())
    }

    pub fn pauli_x() -> Self {
        Self::new(ZERO, ONE, ONE, ZERO)
    }

    pub fn pauli_y() -> Self {
        Self::new(ZERO, -I, I, ZERO)
    }

    pub fn pauli_z() -> Self {
        Self::diag(1.0, -1.0)
    }

    pub fn from_bloch(p: Bloch) -> Self {
        let [x, y, z] = p.b;
        Self::new(
            Complex64::new(p.a + z, 0.0),
            Complex64::new(x, -y),
            Complex64::new(x, y),
            Complex64::new(p.a - z, 0.0),
        )
    }

    /// Pauli decomposition of the Hermitian part `(M + M*)/2`.
    pub fn bloch(&self) -> Bloch {
        let m = &self.m;
        Bloch {
            a: 0.5 * (m[0][0].re + m[1][1].re),
            b: [
                0.5 * (m[0][1].re + m[1][0].re),
                0.5 * (m[1][0].im - m[0][1].im),
                0.5 * (m[0][0].re - m[1][1].re),
            ],
        }
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn conj(&self) -> Self {
        let m = &self.m;
        Self::new(m[0][0].conj(), m[0][1].conj(), m[1][0].conj(), m[1][1].conj())
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Hilbert–Schmidt norm `sqrt(tr(M* M))`.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()) * 0.5
    }

    /// `‖M − M*‖` in the Hilbert–Schmidt norm.
    pub fn hermiticity_residual(&self) -> f64 {
        (*self - self.adjoint()).norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    pub fn ensure_hermitian(&self, tol: f64) -> Result<()> {
        let residual = self.hermiticity_residual();
        if residual <= tol {
            Ok(())
        } else {
            Err(HbkError::NotHermitian { residual, tol })
        }
    }

    /// Eigenvalues `(λ_min, λ_max)` of the Hermitian part.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let p = self.bloch();
        let r = p.radius();
        (p.a - r, p.a + r)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().0
    }

    /// Distance of the spectrum from `[0, 1]`: `max(−λ_min, λ_max − 1, 0)`.
    pub fn fermi_violation(&self) -> f64 {
        let (lo, hi) = self.eigenvalues();
        (-lo).max(hi - 1.0).max(0.0)
    }

    /// `J[M] = tr(M)·I − M`.
    pub fn j(&self) -> Self {
        let m = &self.m;
        Self::new(m[1][1], -m[0][1], -m[1][0], m[0][0])
    }

    /// `M̃ = I − M`.
    pub fn tilde(&self) -> Self {
        Self::identity() - *self
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    /// `|M| = (M* M)^{1/2}`.
    ///
    /// Hermitian inputs use their own spectral decomposition, `|a ± r|` on the
    /// two projections. Other inputs go through the 2×2 identity
    /// `sqrt(P) = (P + sqrt(det P)·I) / sqrt(tr P + 2 sqrt(det P))` for `P ⪰ 0`.
    pub fn abs(&self) -> Self {
        if self.hermiticity_residual() == 0.0 {
            let p = self.bloch();
            let r = p.radius();
            return p.spectral((p.a + r).abs(), (p.a - r).abs());
        }
        let p = self.adjoint() * *self;
        let det = p.det().re.max(0.0).sqrt();
        let denom = (p.trace().re + 2.0 * det).max(0.0).sqrt();
        if denom == 0.0 {
            return Self::zero();
        }
        let mut out = (p + Self::scalar(det)) * (1.0 / denom);
        // P is Hermitian; drop the rounding noise on the diagonal imaginary parts.
        out.m[0][0].im = 0.0;
        out.m[1][1].im = 0.0;
        out
    }

    /// Spectral clipping of a Hermitian matrix into `[0, 1]`, computed as
    /// `Φ[M] = ½(I + |M| − |I − M|)`.
    pub fn truncate(&self) -> Result<Self> {
        self.ensure_hermitian(TOL_HERM)?;
        Ok(self.truncate_unchecked())
    }

    pub(crate) fn truncate_unchecked(&self) -> Self {
        let h = self.hermitian_part();
        (Self::identity() + h.abs() - h.tilde().abs()) * 0.5
    }

    /// `exp(i·dt·H)` for Hermitian `H`.
    pub fn unitary_exp(&self, dt: f64) -> Result<Self> {
        self.ensure_hermitian(TOL_HERM)?;
        Ok(self.unitary_exp_unchecked(dt))
    }

    pub(crate) fn unitary_exp_unchecked(&self, dt: f64) -> Self {
        let p = self.bloch();
        let r = p.radius();
        let phase = Complex64::from_polar(1.0, dt * p.a);
        let (s, c) = (dt * r).sin_cos();
        let axis = if r > 0.0 {
            Self::from_bloch(Bloch {
                a: 0.0,
                b: [p.b[0] / r, p.b[1] / r, p.b[2] / r],
            })
        } else {
            Self::zero()
        };
        (Self::scalar(c) + axis * Complex64::new(0.0, s)) * phase
    }

    /// Matrix exponential of a general complex 2×2 matrix.
    ///
    /// With `B = μI + N`, `tr N = 0`, one has `N² = q²·I` where `q² = −det N`,
    /// so `exp(B) = e^μ (cosh q · I + sinh(q)/q · N)`.
    pub fn exp(&self) -> Self {
        let mu = self.trace() * 0.5;
        let n = *self - Self::identity() * mu;
        let q2 = -n.det();
        let (ch, shc) = cosh_sinhc(q2);
        (Self::identity() * ch + n * shc) * mu.exp()
    }

    /// Applies a real function to the eigenvalues of the Hermitian part.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        let p = self.bloch();
        let r = p.radius();
        p.spectral(f(p.a + r), f(p.a - r))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).norm()
    }

    pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> Self {
        Self::from_bloch(Bloch {
            a: scale * rng.gen_range(-1.0..1.0),
            b: [
                scale * rng.gen_range(-1.0..1.0),
                scale * rng.gen_range(-1.0..1.0),
                scale * rng.gen_range(-1.0..1.0),
            ],
        })
    }

    /// Random Hermitian matrix with eigenvalues drawn uniformly from `[lo, hi]`
    /// and a uniformly distributed eigenbasis.
    pub fn random_with_spectrum<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> Self {
        let l1 = rng.gen_range(lo..=hi);
        let l2 = rng.gen_range(lo..=hi);
        let axis = random_unit_vector(rng);
        let half = 0.5 * (l1 - l2);
        Self::from_bloch(Bloch {
            a: 0.5 * (l1 + l2),
            b: [half * axis[0], half * axis[1], half * axis[2]],
        })
    }

    pub fn random_fermi<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::random_with_spectrum(rng, 0.0, 1.0)
    }

    pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, max_eig: f64) -> Self {
        Self::random_with_spectrum(rng, 0.0, max_eig)
    }
}

/// `(cosh q, sinh(q)/q)` as functions of `q²`.
fn cosh_sinhc(q2: Complex64) -> (Complex64, Complex64) {
    if q2.norm() < 1e-6 {
        let ch = ONE + q2 * (0.5 + q2 / 24.0);
        let shc = ONE + q2 * (1.0 / 6.0 + q2 / 120.0);
        return (ch, shc);
    }
    let q = q2.sqrt();
    (q.cosh(), q.sinh() / q)
}

fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let rho = (1.0 - z * z).max(0.0).sqrt();
    [rho * phi.cos(), rho * phi.sin(), z]
}

/// `J[M] = tr(M)·I − M`.
pub fn j_transform(m: &SpinMatrix) -> SpinMatrix {
    m.j()
}

pub fn tilde(m: &SpinMatrix) -> SpinMatrix {
    m.tilde()
}

pub fn commutator(a: &SpinMatrix, b: &SpinMatrix) -> SpinMatrix {
    a.commutator(b)
}

pub fn truncate(m: &SpinMatrix) -> Result<SpinMatrix> {
    m.truncate()
}

pub fn unitary_exp(h: &SpinMatrix, dt: f64) -> Result<SpinMatrix> {
    h.unitary_exp(dt)
}

/// Minimum eigenvalue of the Hermitian part of `A·J[BC] + C·J[BA]`.
///
/// Nonnegative for positive semidefinite `A`, `B`, `C` up to rounding.
pub fn matrix_inequality_residual(a: &SpinMatrix, b: &SpinMatrix, c: &SpinMatrix) -> Result<f64> {
    for m in [a, b, c] {
        m.ensure_hermitian(TOL_HERM)?;
        let min_eig = m.min_eigenvalue();
        if min_eig < -TOL_FERMI {
            return Err(HbkError::NotPsd {
                min_eig,
                tol: TOL_FERMI,
            });
        }
    }
    let lhs = *a * (*b * *c).j() + *c * (*b * *a).j();
    Ok(lhs.min_eigenvalue())
}

impl Add for SpinMatrix {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (a, b) = (&self.m, &rhs.m);
        Self::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl Sub for SpinMatrix {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let (a, b) = (&self.m, &rhs.m);
        Self::new(
            a[0][0] - b[0][0],
            a[0][1] - b[0][1],
            a[1][0] - b[1][0],
            a[1][1] - b[1][1],
        )
    }
}

impl Neg for SpinMatrix {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl Mul for SpinMatrix {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.m, &rhs.m);
        Self::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Mul<f64> for SpinMatrix {
    type Output = Self;
    #[inline]
    fn mul(self, s: f64) -> Self {
        let a = &self.m;
        Self::new(a[0][0] * s, a[0][1] * s, a[1][0] * s, a[1][1] * s)
    }
}

impl Mul<Complex64> for SpinMatrix {
    type Output = Self;
    #[inline]
    fn mul(self, s: Complex64) -> Self {
        let a = &self.m;
        Self::new(a[0][0] * s, a[0][1] * s, a[1][0] * s, a[1][1] * s)
    }
}

impl AddAssign for SpinMatrix {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        for (x, y) in self.m.iter_mut().flatten().zip(rhs.m.iter().flatten()) {
            *x += *y;
        }
    }
}

impl SubAssign for SpinMatrix {
    fn sub_assign(&mut self, rhs: Self) {
        for (x, y) in self.m.iter_mut().flatten().zip(rhs.m.iter().flatten()) {
            *x -= *y;
        }
    }
}

impl MulAssign<f64> for SpinMatrix {
    fn mul_assign(&mut self, s: f64) {
        for x in self.m.iter_mut().flatten() {
            *x *= s;
        }
    }
}

impl std::iter::Sum for SpinMatrix {
    fn sum<It: Iterator<Item = Self>>(iter: It) -> Self {
        iter.fold(Self::zero(), |acc, x| acc + x)
    }
}
