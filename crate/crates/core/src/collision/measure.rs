//! Scalar kernels built on the collision shell: `σ_coll`, the trilinear
//! kernel `C₀`, and the bilinear Lorentzian / principal-value forms.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{check_epsilon, direct::triple_sum_c64, lorentz, pv_lorentz};
use crate::error::{HbkError, Result};
use crate::field::{pairwise_sum_f64, WignerField};
use crate::lattice::{Band, SignVector};
use crate::spin::SpinMatrix;

fn check_len(band: &Band, n: usize, what: &str) -> Result<()> {
    if n != band.grid().len() {
        return Err(HbkError::GridMismatch(format!(
            "{what} has {n} points, grid has {}",
            band.grid().len()
        )));
    }
    Ok(())
}

/// All values `Ω̃((k₁,k₂,k₃),σ)` for a fixed `k₁`, in `(k₂, k₃)` order.
fn omega_tilde_table(band: &Band, k1: usize, sigma: SignVector) -> Vec<f64> {
    let len = band.grid().len();
    let mut out = Vec::with_capacity(len * len);
    for k2 in 0..len {
        for k3 in 0..len {
            out.push(band.omega_tilde([k1, k2, k3], sigma));
        }
    }
    out
}

fn shell_sum(values: &[f64], len: usize, f: impl Fn(f64) -> f64) -> f64 {
    let rows: Vec<f64> = values
        .chunks_exact(len)
        .map(|row| row.iter().map(|&x| f(x)).sum())
        .collect();
    pairwise_sum_f64(&rows)
}

/// `σ_coll(k₁, α) = (1/π) N^{−2d} Σ_{k₂,k₃} L(Ω̃ − α)`.
pub fn sigma_coll_map(band: &Band, epsilon: f64, k1: usize, alpha: f64, sigma: SignVector) -> Result<f64> {
    Ok(sigma_coll_profile(band, epsilon, k1, sigma, &[alpha])?[0])
}

/// `σ_coll(k₁, α)` for a list of offsets.
pub fn sigma_coll_profile(band: &Band, epsilon: f64, k1: usize, sigma: SignVector, alphas: &[f64]) -> Result<Vec<f64>> {
    check_epsilon(epsilon)?;
    let len = band.grid().len();
    let table = omega_tilde_table(band, k1, sigma);
    let norm = band.grid().weight().powi(2) / PI;
    Ok(alphas
        .iter()
        .map(|&alpha| norm * shell_sum(&table, len, |x| lorentz(x - alpha, epsilon)))
        .collect())
}

/// Trapezoid rule for `∫_{−m}^{m} σ_coll(k₁, α) dα` with step `dα`; returns
/// the α nodes, the profile, and the integral.
pub fn sigma_coll_alpha_integral(
    band: &Band,
    epsilon: f64,
    k1: usize,
    sigma: SignVector,
    m: f64,
    d_alpha: f64,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    if !(m > 0.0 && d_alpha > 0.0) {
        return Err(HbkError::config("alpha", "range and step must be positive"));
    }
    let steps = (2.0 * m / d_alpha).round().max(1.0) as usize;
    let h = 2.0 * m / steps as f64;
    let alphas: Vec<f64> = (0..=steps).map(|i| -m + i as f64 * h).collect();
    let profile = sigma_coll_profile(band, epsilon, k1, sigma, &alphas)?;
    let inner: Vec<f64> = profile[1..steps].to_vec();
    let integral = h * (0.5 * (profile[0] + profile[steps]) + pairwise_sum_f64(&inner));
    Ok((alphas, profile, integral))
}

/// Upper bound `1/(π ε)` of `σ_coll` over all points and offsets.
pub fn sigma_coll_sup(_band: &Band, epsilon: f64) -> f64 {
    1.0 / (PI * epsilon)
}

/// `(1/π) N^{−2d} Σ_{k₂,k₃} w₁(k₂) w₂(k₃) w₃(k₄) L(ω̲)`.
pub fn c0_trilinear(
    band: &Band,
    epsilon: f64,
    w1: &[Complex64],
    w2: &[Complex64],
    w3: &[Complex64],
    k1: usize,
) -> Result<Complex64> {
    check_epsilon(epsilon)?;
    check_len(band, w1.len(), "w1")?;
    check_len(band, w2.len(), "w2")?;
    check_len(band, w3.len(), "w3")?;
    let sum = triple_sum_c64(band, k1, |k2, k3, k4| {
        w1[k2] * w2[k3] * w3[k4] * lorentz(band.omega_underline(k1, k2, k3, k4), epsilon)
    });
    Ok(sum * (band.grid().weight().powi(2) / PI))
}

fn bilinear(
    band: &Band,
    f: &[Complex64],
    g: &[Complex64],
    sigma: SignVector,
    k0: usize,
    kernel: impl Fn(f64) -> f64,
) -> Result<Complex64> {
    check_len(band, f.len(), "f")?;
    check_len(band, g.len(), "g")?;
    let len = band.grid().len();
    let rows: Vec<Complex64> = (0..len)
        .map(|k1p| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k2p in 0..len {
                acc += g[k2p] * kernel(band.omega_tilde([k0, k1p, k2p], sigma));
            }
            f[k1p] * acc
        })
        .collect();
    Ok(crate::field::pairwise_sum_c64(&rows) * band.grid().weight().powi(2))
}

/// `N^{−2d} Σ_{k₁′,k₂′} f(k₁′) g(k₂′) ε/(Ω̃² + ε²)` with `Ω̃ = Ω̃((k₀,k₁′,k₂′),σ)`.
pub fn lorentz_bilinear(
    band: &Band,
    f: &[Complex64],
    g: &[Complex64],
    sigma: SignVector,
    epsilon: f64,
    k0: usize,
) -> Result<Complex64> {
    check_epsilon(epsilon)?;
    bilinear(band, f, g, sigma, k0, |x| lorentz(x, epsilon))
}

/// `N^{−2d} Σ_{k₁′,k₂′} f(k₁′) g(k₂′) Ω̃/(Ω̃² + ε²)`.
pub fn pv_bilinear(
    band: &Band,
    f: &[Complex64],
    g: &[Complex64],
    sigma: SignVector,
    epsilon: f64,
    k0: usize,
) -> Result<Complex64> {
    check_epsilon(epsilon)?;
    bilinear(band, f, g, sigma, k0, |x| pv_lorentz(x, epsilon))
}

/// `H_eff^ε[W](k₁)` reassembled entrywise from principal-value bilinear forms.
///
/// The short integrand splits into products of two field entries taken at
/// `(k₂,k₃)`, `(k₂,k₄)` or `(k₃,k₄)`, plus terms linear in `W₂`. Pairs not
/// involving `k₃` and `k₄` together use the native sign vector
/// `(1,1,−1,−1)`; the `(k₃,k₄)` pairs are reparametrized with base point
/// `−k₁`, sign vector `(1,−1,−1,1)` and the second factor reflected.
pub fn h_eff_via_bilinears(band: &Band, epsilon: f64, w: &WignerField, k1: usize) -> Result<SpinMatrix> {
    check_epsilon(epsilon)?;
    check_len(band, w.len(), "field")?;
    let grid = band.grid();
    let comp: [[Vec<Complex64>; 2]; 2] = std::array::from_fn(|i| std::array::from_fn(|j| w.component(i, j)));
    let refl: [[Vec<Complex64>; 2]; 2] =
        std::array::from_fn(|i| std::array::from_fn(|j| (0..grid.len()).map(|k| comp[i][j][grid.neg(k)]).collect()));
    let ones = vec![Complex64::new(1.0, 0.0); grid.len()];
    let native = SignVector::COLLISION;
    let mirrored = SignVector::new([1, -1, -1, 1])?;
    let k1m = grid.neg(k1);
    let ic = |f: &[Complex64], g: &[Complex64]| pv_bilinear(band, f, g, native, epsilon, k1);
    let ir = |f: &[Complex64], g: &[Complex64]| pv_bilinear(band, f, g, mirrored, epsilon, k1m);

    let mut out = SpinMatrix::zero();
    for i in 0..2 {
        for j in 0..2 {
            let delta = if i == j { 1.0 } else { 0.0 };
            let mut m = Complex64::new(0.0, 0.0);
            for b in 0..2 {
                // 2 tr(W₄) W₃ − 2 tr(W₂) W₃ + 2δ tr(W₂)
                m += ir(&comp[i][j], &refl[b][b])? * 2.0;
                m -= ic(&comp[b][b], &comp[i][j])? * 2.0;
                m += ic(&comp[b][b], &ones)? * (2.0 * delta);
                for a in 0..2 {
                    // −2δ Σ W₂_ab W₄_ba
                    m -= ic(&comp[a][b], &comp[b][a])? * (2.0 * delta);
                }
            }
            for a in 0..2 {
                // −(W₄W₃ + W₃W₄) over (k₃,k₄)
                m -= ir(&comp[a][j], &refl[i][a])?;
                m -= ir(&comp[i][a], &refl[a][j])?;
                // (W₂W₃ + W₃W₂) over (k₂,k₃) and (W₂W₄ + W₄W₂) over (k₂,k₄)
                let pair = ic(&comp[i][a], &comp[a][j])? + ic(&comp[a][j], &comp[i][a])?;
                m += pair * 2.0;
            }
            m -= ic(&comp[i][j], &ones)? * 2.0;
            out.m[i][j] = m * -0.5;
        }
    }
    Ok(out)
}
