//! Dispersivity checks for a band: decay of the free propagator, the Bessel
//! envelope, and the oscillatory integral `F(s)` controlling `∫|𝒢(s)| ds`.

mod bessel;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

pub use bessel::{adaptive_integral, bessel_f, bessel_j01_series, bessel_j0_series, BesselTable};

use crate::diagnostics::DiagnosticsReport;
use crate::error::{HbkError, Result};
use crate::lattice::{Dispersion, SignVector, TorusGrid};

/// Minimum number of α nodes per axis for `F` estimates.
pub const MIN_ALPHA_RESOLUTION: usize = 16;

/// Power-law fit `value ≈ C · x^{−γ}` over the upper half of the samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub abscissae: Vec<f64>,
    pub values: Vec<f64>,
    /// `γ`, positive for decay.
    pub fitted_exponent: f64,
    pub fitted_constant: f64,
}

impl DecayFit {
    pub fn fit(abscissae: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if abscissae.len() != values.len() || abscissae.len() < 4 {
            return Err(HbkError::EmptyInput("decay fit needs at least four samples"));
        }
        if abscissae.windows(2).any(|w| !(w[0] > 0.0 && w[1] > w[0])) {
            return Err(HbkError::config("abscissae", "must be positive and increasing"));
        }
        let start = abscissae.len() / 2;
        let xs: Vec<f64> = abscissae[start..].iter().map(|x| x.ln()).collect();
        let ys: Vec<f64> = values[start..].iter().map(|y| y.ln()).collect();
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let slope = sxy / sxx;
        Ok(Self {
            abscissae,
            values,
            fitted_exponent: -slope,
            fitted_constant: (my - slope * mx).exp(),
        })
    }
}

fn cube_sum(values: &[Complex64]) -> f64 {
    let cubes: Vec<f64> = values.iter().map(|z| z.norm().powi(3)).collect();
    crate::field::pairwise_sum_f64(&cubes)
}

/// `‖p_t‖₃³ = Σ_x |p_t(x)|³` on the lattice window of the grid. Product-form
/// nearest-neighbor bands use the per-axis factorization `(Σ_x |q_t(x)|³)^d`.
pub fn pt_l3_norm_cubed(dispersion: &Dispersion, grid: &TorusGrid, t: f64) -> Result<f64> {
    match dispersion {
        Dispersion::NearestNeighbor { .. } => {
            let axis = TorusGrid::new(1, grid.n())?;
            let band = Dispersion::nearest_neighbor(0.0).sample(&axis)?;
            Ok(cube_sum(&band.free_propagator_field(t)).powi(grid.dim() as i32))
        }
        Dispersion::Tabulated { .. } => Ok(cube_sum(&dispersion.sample(grid)?.free_propagator_field(t))),
    }
}

/// `‖p_t‖₃³` at `samples` evenly spaced times in `[t_max/8, t_max]`, with a
/// power-law fit over the later half. The sums oscillate in `t`, so a few
/// dozen samples are needed for a stable exponent.
pub fn pt_l3_decay(dispersion: &Dispersion, grid: &TorusGrid, t_max: f64, samples: usize) -> Result<DecayFit> {
    let limit = grid.n() as f64 / 4.0;
    if t_max > limit {
        return Err(HbkError::WindowTooLong { t_max, limit });
    }
    if !(t_max > 0.0) || samples < 4 {
        return Err(HbkError::config(
            "t_max/samples",
            "need t_max > 0 and at least four samples",
        ));
    }
    let t_min = t_max / 8.0;
    let step = (t_max - t_min) / (samples - 1) as f64;
    let times: Vec<f64> = (0..samples).map(|i| t_min + i as f64 * step).collect();
    let values = times
        .par_iter()
        .map(|&t| pt_l3_norm_cubed(dispersion, grid, t))
        .collect::<Result<Vec<_>>>()?;
    DecayFit::fit(times, values)
}

/// `max_r |f(r)| (1 + r)^{1/2}` on a uniform grid of `[0, r_max]`.
pub fn bessel_envelope_constant(r_max: f64, step: f64) -> f64 {
    let n = (r_max / step).ceil() as usize;
    (0..=n)
        .into_par_iter()
        .map(|i| {
            let r = (i as f64 * step).min(r_max);
            bessel_f(r).norm() * (1.0 + r).sqrt()
        })
        .reduce(|| 0.0, f64::max)
}

/// The moduli `(R₁, R₂, R₃)(s, α)` for sign vector `σ`.
pub fn amplitudes(s: [f64; 4], alpha: [f64; 3], sigma: SignVector) -> [f64; 3] {
    let e = |x: f64| Complex64::from_polar(1.0, x);
    let g = |i: usize| sigma.get(i);
    let [a1, a2, a3] = alpha;
    let r1 = s[0] * g(0) + s[1] * g(0) + e(-a1) * (s[0] * g(3)) + e(-(a1 + a3)) * (s[1] * g(3));
    let r2 = s[2] * g(0) + s[3] * g(0) + e(a3 - a2) * (s[2] * g(3)) + e(-a2) * (s[3] * g(3));
    let r3 = Complex64::new(s[0] * g(1) + s[2] * g(1), 0.0)
        + e(-a3) * (s[1] * g(1) + s[3] * g(1))
        + e(a1) * (s[0] * g(2) + s[1] * g(2))
        + e(a2 - a3) * (s[2] * g(2) + s[3] * g(2));
    [r1.norm(), r2.norm(), r3.norm()]
}

/// `R_i(s, α)` for `i ∈ {1, 2, 3}`.
///
/// # Panics
/// If `i` is not 1, 2 or 3.
pub fn amplitude_r(s: [f64; 4], alpha: [f64; 3], sigma: SignVector, i: usize) -> f64 {
    assert!((1..=3).contains(&i), "amplitude index must be 1, 2 or 3");
    amplitudes(s, alpha, sigma)[i - 1]
}

fn check_alpha_resolution(res: usize) -> Result<()> {
    if res < MIN_ALPHA_RESOLUTION {
        return Err(HbkError::ResolutionTooCoarse(format!(
            "{res} alpha nodes per axis, need at least {MIN_ALPHA_RESOLUTION}"
        )));
    }
    Ok(())
}

fn alpha_nodes(res: usize) -> Vec<f64> {
    let h = 2.0 * PI / res as f64;
    (0..res).map(|j| -PI + (j as f64 + 0.5) * h).collect()
}

/// `F(s) = (2π)^{−3} ∫_{[−π,π]³} Π_i f(R_i(s, α)) dα` by the periodic
/// midpoint rule with `res` nodes per axis, evaluating `f` by quadrature.
pub fn f_estimate(s: [f64; 4], sigma: SignVector, res: usize) -> Result<Complex64> {
    check_alpha_resolution(res)?;
    let nodes = alpha_nodes(res);
    let planes: Vec<Complex64> = nodes
        .par_iter()
        .map(|&a1| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &a2 in &nodes {
                for &a3 in &nodes {
                    let r = amplitudes(s, [a1, a2, a3], sigma);
                    acc += bessel_f(r[0]) * bessel_f(r[1]) * bessel_f(r[2]);
                }
            }
            acc
        })
        .collect();
    Ok(crate::field::pairwise_sum_c64(&planes) / (res as f64).powi(3))
}

/// Precomputed phases for evaluating `F` at many `s` with a Bessel table.
struct FKernel {
    res: usize,
    e_m: Vec<Complex64>,
    e_p: Vec<Complex64>,
    /// `e^{i(j−res)h}` for `j < 2·res`.
    e_diff: Vec<Complex64>,
    e_sum: Vec<Complex64>,
    sigma: [f64; 4],
}

impl FKernel {
    fn new(res: usize, sigma: SignVector) -> Self {
        let nodes = alpha_nodes(res);
        let h = 2.0 * PI / res as f64;
        Self {
            res,
            e_m: nodes.iter().map(|&a| Complex64::from_polar(1.0, -a)).collect(),
            e_p: nodes.iter().map(|&a| Complex64::from_polar(1.0, a)).collect(),
            e_diff: (0..2 * res)
                .map(|j| Complex64::from_polar(1.0, (j as f64 - res as f64) * h))
                .collect(),
            // e^{−i(a₁+a₃)} for every pair
            e_sum: (0..res * res)
                .map(|ij| Complex64::from_polar(1.0, -(nodes[ij / res] + nodes[ij % res])))
                .collect(),
            sigma: [sigma.get(0), sigma.get(1), sigma.get(2), sigma.get(3)],
        }
    }

    fn eval(&self, s: [f64; 4], table: &BesselTable, f1: &mut [f64], f2: &mut [f64]) -> f64 {
        let m = self.res;
        let [g1, g2, g3, g4] = self.sigma;
        let modulus = |z: Complex64| z.norm_sqr().sqrt();
        for a1 in 0..m {
            for a3 in 0..m {
                let r1 = (s[0] + s[1]) * g1 + self.e_m[a1] * (s[0] * g4) + self.e_sum[a1 * m + a3] * (s[1] * g4);
                f1[a1 * m + a3] = table.j0(modulus(r1));
            }
        }
        // f2 stored transposed: [a3][a2]
        for a3 in 0..m {
            for a2 in 0..m {
                let phase = self.e_diff[m + a3 - a2];
                let r2 = (s[2] + s[3]) * g1 + phase * (s[2] * g4) + self.e_m[a2] * (s[3] * g4);
                f2[a3 * m + a2] = table.j0(modulus(r2));
            }
        }
        let c13 = (s[0] + s[2]) * g2;
        let c24 = (s[1] + s[3]) * g2;
        let c12 = (s[0] + s[1]) * g3;
        let c34 = (s[2] + s[3]) * g3;
        let mut total = 0.0;
        for a3 in 0..m {
            let u = self.e_m[a3] * c24 + c13;
            let phases = &self.e_diff[m - a3..2 * m - a3];
            let row2 = &f2[a3 * m..(a3 + 1) * m];
            for a1 in 0..m {
                let v = u + self.e_p[a1] * c12;
                let mut acc = 0.0;
                for (ph, w2) in phases.iter().zip(row2) {
                    let r3 = v + ph * c34;
                    acc += w2 * table.j0(modulus(r3));
                }
                total += f1[a1 * m + a3] * acc;
            }
        }
        total / (m as f64).powi(3)
    }
}

/// Table-driven `F(s)` for bulk use; `F` is real for every `s`.
pub fn f_estimate_tabulated(s: [f64; 4], sigma: SignVector, res: usize, table: &BesselTable) -> Result<f64> {
    check_alpha_resolution(res)?;
    let k = FKernel::new(res, sigma);
    let (mut f1, mut f2) = (vec![0.0; res * res], vec![0.0; res * res]);
    Ok(k.eval(s, table, &mut f1, &mut f2))
}

/// `F(s) = ∫_{T³×T³} e^{−i Σ_{ij} s_i σ_j cos P_ij(k,k′)} dk dk′` by the
/// periodic rectangle rule with `res` points per axis. Cost `res⁶`.
pub fn f_direct(s: [f64; 4], sigma: SignVector, res: usize) -> Result<Complex64> {
    if res < 4 {
        return Err(HbkError::ResolutionTooCoarse(format!("{res} points per axis")));
    }
    let m = res;
    let c: Vec<f64> = (0..m).map(|j| (2.0 * PI * j as f64 / m as f64).cos()).collect();
    let sg = [sigma.get(0), sigma.get(1), sigma.get(2), sigma.get(3)];
    let idx = |a: usize, b: usize, e: usize| (a + b + m - e) % m;
    let planes: Vec<Complex64> = (0..m)
        .into_par_iter()
        .map(|k1| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k2 in 0..m {
                for k3 in 0..m {
                    let row1 = s[0] * (sg[0] * c[k1] + sg[1] * c[k2] + sg[2] * c[k3] + sg[3] * c[idx(k1, k2, k3)]);
                    for p2 in 0..m {
                        let row2 = s[1] * (sg[0] * c[k1] + sg[1] * c[p2] + sg[2] * c[k3] + sg[3] * c[idx(k1, p2, k3)]);
                        for p1 in 0..m {
                            for p3 in 0..m {
                                let row3 =
                                    s[2] * (sg[0] * c[p1] + sg[1] * c[k2] + sg[2] * c[p3] + sg[3] * c[idx(p1, k2, p3)]);
                                let row4 =
                                    s[3] * (sg[0] * c[p1] + sg[1] * c[p2] + sg[2] * c[p3] + sg[3] * c[idx(p1, p2, p3)]);
                                acc += Complex64::from_polar(1.0, -(row1 + row2 + row3 + row4));
                            }
                        }
                    }
                }
            }
            acc
        })
        .collect();
    Ok(crate::field::pairwise_sum_c64(&planes) / (m as f64).powi(6))
}

/// Discretization of the box integrals `∫_{[−S,S]⁴} |F(s)|^d ds`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxResolution {
    /// Midpoint-rule step in every `s` direction.
    pub s_step: f64,
    pub alpha_points: usize,
}

impl Default for BoxResolution {
    fn default() -> Self {
        Self {
            s_step: 0.5,
            alpha_points: MIN_ALPHA_RESOLUTION,
        }
    }
}

/// Partial integrals `∫_{[−S_j,S_j]⁴} |F(s)|^d ds` for every `d` in `dims`,
/// one row per dimension.
pub fn g_box_integrals(sigma: SignVector, dims: &[u32], boxes: &[f64], res: BoxResolution) -> Result<Vec<Vec<f64>>> {
    check_alpha_resolution(res.alpha_points)?;
    if !(res.s_step > 0.0 && res.s_step <= 1.0) {
        return Err(HbkError::ResolutionTooCoarse(format!(
            "s step {} must lie in (0, 1] to resolve the unit-scale oscillations of F",
            res.s_step
        )));
    }
    if boxes.is_empty() || boxes.windows(2).any(|w| w[1] <= w[0]) || boxes[0] <= 0.0 {
        return Err(HbkError::config("boxes", "must be positive and strictly increasing"));
    }
    let half_counts: Vec<i64> = boxes
        .iter()
        .map(|&b| {
            let c = b / res.s_step;
            if (c - c.round()).abs() > 1e-9 {
                Err(HbkError::config("boxes", "every box must be a multiple of the s step"))
            } else {
                Ok(c.round() as i64)
            }
        })
        .collect::<Result<_>>()?;
    let outer = *half_counts.last().expect("non-empty");
    let h = res.s_step;
    let kernel = FKernel::new(res.alpha_points, sigma);
    // R ≤ 2 Σ|s_i|
    let table = BesselTable::new(8.0 * boxes.last().expect("non-empty") + 2.0, 1.0 / 64.0);
    let coord = |m: i64| (m as f64 + 0.5) * h;
    let nb = boxes.len();
    let nd = dims.len();
    // s₁ > 0 only: F(−s) = F(s)
    let slabs: Vec<Vec<f64>> = (0..outer)
        .into_par_iter()
        .map(|m1| {
            let a2 = res.alpha_points * res.alpha_points;
            let (mut f1, mut f2) = (vec![0.0; a2], vec![0.0; a2]);
            let mut acc = vec![0.0; nd * nb];
            for m2 in -outer..outer {
                for m3 in -outer..outer {
                    for m4 in -outer..outer {
                        let s = [coord(m1), coord(m2), coord(m3), coord(m4)];
                        let reach = [m1, m2, m3, m4]
                            .iter()
                            .map(|&m| if m < 0 { -m - 1 } else { m })
                            .max()
                            .unwrap();
                        let b = half_counts.iter().position(|&c| reach < c).expect("inside outer box");
                        let f = kernel.eval(s, &table, &mut f1, &mut f2).abs();
                        for (j, &d) in dims.iter().enumerate() {
                            acc[j * nb + b] += f.powi(d as i32);
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let vol = 2.0 * h.powi(4);
    let mut out = vec![vec![0.0; nb]; nd];
    for (j, row) in out.iter_mut().enumerate() {
        let mut running = 0.0;
        for (b, v) in row.iter_mut().enumerate() {
            let shell: Vec<f64> = slabs.iter().map(|a| a[j * nb + b]).collect();
            running += crate::field::pairwise_sum_f64(&shell) * vol;
            *v = running;
        }
    }
    Ok(out)
}

fn integrability_report(
    d: u32,
    sigma: SignVector,
    boxes: &[f64],
    partial: &[f64],
    res: BoxResolution,
) -> DiagnosticsReport {
    let increments: Vec<f64> = partial
        .iter()
        .enumerate()
        .map(|(i, &p)| if i == 0 { p } else { p - partial[i - 1] })
        .collect();
    let ok = increments.windows(2).all(|w| w[1] < w[0]);
    let series = boxes.iter().copied().zip(increments.iter().copied()).collect();
    if d < 3 {
        log::info!("integrability verdict at d = {d} is descriptive only");
    }
    DiagnosticsReport::with_verdict("g-integrability", 0.0, series, ok)
        .meta("criterion", "box increments strictly decreasing")
        .meta("d", d)
        .meta("sigma", sigma.entries().to_vec())
        .meta("partial_integrals", partial.to_vec())
        .meta("lower_estimate_c_g", *partial.last().unwrap_or(&0.0))
        .meta("s_step", res.s_step)
        .meta("alpha_points", res.alpha_points)
}

/// Nested-box estimate of `∫_{ℝ⁴} |F(s)|^d ds`; pass iff the increments
/// between consecutive boxes strictly decrease.
pub fn g_integrability_estimate(
    sigma: SignVector,
    d: u32,
    boxes: &[f64],
    res: BoxResolution,
) -> Result<DiagnosticsReport> {
    Ok(g_integrability_estimates(sigma, &[d], boxes, res)?.remove(0))
}

/// As [`g_integrability_estimate`] for several `d`, sharing the `F` evaluations.
pub fn g_integrability_estimates(
    sigma: SignVector,
    dims: &[u32],
    boxes: &[f64],
    res: BoxResolution,
) -> Result<Vec<DiagnosticsReport>> {
    if dims.is_empty() {
        return Err(HbkError::EmptyInput("dimensions"));
    }
    let partial = g_box_integrals(sigma, dims, boxes, res)?;
    Ok(dims
        .iter()
        .zip(&partial)
        .map(|(&d, p)| integrability_report(d, sigma, boxes, p, res))
        .collect())
}
