//! Spectral evaluation of the collision sums.
//!
//! The Lorentzian and principal-value kernels are Fourier integrals,
//!
//! ```text
//! ε/(x² + ε²) = ∫ ds ½ e^{−ε|s|} e^{isx},
//! x/(x² + ε²) = ∫ ds (−i/2) sign(s) e^{−ε|s|} e^{isx},
//! ```
//!
//! and `e^{isω̲}` factorizes over the four momenta. For fixed `s` the sum
//! `Σ_{k₂,k₃} g(k₃) J[a(k₂) h(k₁+k₂−k₃)]` is a correlation followed by a
//! convolution, so in Fourier space it is `ĝ(ξ) J[â(−ξ) ĥ(ξ)]`. Each
//! quadrature node costs a fixed number of d-dimensional FFTs.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{CollisionParams, Components, Parts};
use crate::error::{HbkError, Result};
use crate::fft::FftNd;
use crate::lattice::Band;
use crate::quadrature::composite_gauss_legendre;
use crate::spin::SpinMatrix;

type Planes = [Vec<Complex64>; 4];

pub(super) fn check_options(params: &CollisionParams) -> Result<()> {
    let o = &params.spectral;
    if !(o.tail_tol > 0.0 && o.tail_tol < 1.0) {
        return Err(HbkError::config("collision.spectral.tail_tol", "must lie in (0, 1)"));
    }
    if o.panel_points == 0 || !(o.panel_phase > 0.0) {
        return Err(HbkError::config(
            "collision.spectral",
            "panel_points and panel_phase must be positive",
        ));
    }
    let tail = (-params.epsilon * s_max(params)).exp();
    if tail > 1e-10 {
        return Err(HbkError::SpectralUnderresolved { tail });
    }
    Ok(())
}

fn s_max(params: &CollisionParams) -> f64 {
    params
        .spectral
        .s_max
        .unwrap_or_else(|| -params.spectral.tail_tol.ln() / params.epsilon)
}

/// Quadrature nodes on `[0, S_max]` for energy differences bounded by `range`.
pub(super) fn s_nodes(params: &CollisionParams, range: f64) -> Vec<(f64, f64)> {
    let eps = params.epsilon;
    let smax = s_max(params);
    let zmax = (eps * eps + range * range).sqrt();
    let width = params.spectral.panel_phase / zmax;
    let panels = ((smax / width).ceil() as usize).max(1);
    composite_gauss_legendre(0.0, smax, panels, params.spectral.panel_points)
}

fn split(w: &[SpinMatrix]) -> Planes {
    std::array::from_fn(|c| w.iter().map(|m| m.m[c / 2][c % 2]).collect())
}

#[inline]
fn matrix(p: &Planes, k: usize) -> SpinMatrix {
    SpinMatrix::new(p[0][k], p[1][k], p[2][k], p[3][k])
}

/// Fourier data shared by `+s` and `−s`.
struct Hats {
    /// `e^{isω}W`, `e^{−isω}W`, `e^{isω}`, `e^{−isω}`.
    pw: Planes,
    mw: Planes,
    p: Vec<Complex64>,
    m: Vec<Complex64>,
}

impl Hats {
    #[inline]
    fn w(&self, plus: bool, k: usize) -> SpinMatrix {
        matrix(if plus { &self.pw } else { &self.mw }, k)
    }

    #[inline]
    fn wt(&self, plus: bool, k: usize) -> SpinMatrix {
        let e = if plus { self.p[k] } else { self.m[k] };
        SpinMatrix::new(e, Complex64::default(), Complex64::default(), e) - self.w(plus, k)
    }
}

struct Workspace {
    fft: FftNd,
    scratch: Vec<Complex64>,
    planes: Planes,
}

impl Workspace {
    fn new(n: usize, d: usize) -> Self {
        let fft = FftNd::new(n, d);
        let len = fft.len();
        Self {
            scratch: fft.make_scratch(),
            planes: std::array::from_fn(|_| vec![Complex64::default(); len]),
            fft,
        }
    }
}

pub(super) fn components(band: &Band, params: &CollisionParams, w: &[SpinMatrix], parts: Parts) -> Components {
    let grid = *band.grid();
    let len = grid.len();
    let eps = params.epsilon;
    let (lo, hi) = band.range();
    let shift = 0.5 * (lo + hi);
    let omega: Vec<f64> = band.values().iter().map(|x| x - shift).collect();
    let nodes = s_nodes(params, 2.0 * (hi - lo));
    let planes_w = split(w);
    let neg: Vec<usize> = (0..len).map(|k| grid.neg(k)).collect();
    let scale = grid.weight().powi(3);
    let chunk = params.spectral.panel_points;

    // A, B, PX, PY summed per panel, panels combined in order
    let panels: Vec<[Vec<SpinMatrix>; 4]> = nodes
        .par_chunks(chunk)
        .map_init(
            || Workspace::new(grid.n(), grid.dim()),
            |ws, panel| {
                let mut acc: [Vec<SpinMatrix>; 4] = std::array::from_fn(|_| vec![SpinMatrix::zero(); len]);
                for &(s, weight) in panel {
                    let hats = transforms(ws, &omega, &planes_w, s);
                    let damp = weight * (-eps * s).exp();
                    let mut z = [[Vec::new(), Vec::new()], [Vec::new(), Vec::new()]];
                    for (kind, zk) in z.iter_mut().enumerate() {
                        for (sign, slot) in zk.iter_mut().enumerate() {
                            *slot = node_sum(ws, &hats, &neg, &omega, s, kind == 0, sign == 0, scale);
                        }
                    }
                    let half = Complex64::new(0.5 * damp, 0.0);
                    let pv = Complex64::new(0.0, -0.5 * damp);
                    for k in 0..len {
                        for kind in 0..2 {
                            let (zp, zm) = (z[kind][0][k], z[kind][1][k]);
                            if parts.diss {
                                acc[kind][k] += (zp + zm) * half;
                            }
                            if parts.heff {
                                acc[2 + kind][k] += (zp - zm) * pv;
                            }
                        }
                    }
                }
                acc
            },
        )
        .collect();

    let total = |slot: usize| -> Vec<SpinMatrix> {
        (0..len)
            .map(|k| {
                let terms: Vec<SpinMatrix> = panels.iter().map(|p| p[slot][k]).collect();
                crate::field::pairwise_sum(&terms)
            })
            .collect()
    };
    let a = if parts.diss {
        total(0)
    } else {
        vec![SpinMatrix::zero(); len]
    };
    let b = if parts.diss {
        total(1)
    } else {
        vec![SpinMatrix::zero(); len]
    };
    let h = parts.heff.then(|| {
        let (px, py) = (total(2), total(3));
        px.iter()
            .zip(&py)
            .map(|(x, y)| ((*x + x.adjoint() + *y + y.adjoint()) * -0.5).hermitian_part())
            .collect()
    });
    Components { a, b, h }
}

fn transforms(ws: &mut Workspace, omega: &[f64], w: &Planes, s: f64) -> Hats {
    let phase: Vec<Complex64> = omega.iter().map(|&x| Complex64::from_polar(1.0, s * x)).collect();
    let mut fwd = |data: Vec<Complex64>| {
        let mut data = data;
        ws.fft.forward(&mut data, &mut ws.scratch);
        data
    };
    let pw: Planes = std::array::from_fn(|c| w[c].iter().zip(&phase).map(|(a, e)| a * e).collect());
    let mw: Planes = std::array::from_fn(|c| w[c].iter().zip(&phase).map(|(a, e)| a * e.conj()).collect());
    let m: Vec<Complex64> = phase.iter().map(|e| e.conj()).collect();
    let [a0, a1, a2, a3] = pw;
    let [b0, b1, b2, b3] = mw;
    Hats {
        pw: [fwd(a0), fwd(a1), fwd(a2), fwd(a3)],
        mw: [fwd(b0), fwd(b1), fwd(b2), fwd(b3)],
        p: fwd(phase),
        m: fwd(m),
    }
}

/// `Z(k₁) = e^{±isω₁} N^{−2d} Σ_{k₂,k₃} e^{±is(ω₂−ω₃−ω₄)} K(k₂,k₃,k₄)` with
/// `K = X` (`x_kind`) or `K = Y`.
#[allow(clippy::too_many_arguments)]
fn node_sum(
    ws: &mut Workspace,
    hats: &Hats,
    neg: &[usize],
    omega: &[f64],
    s: f64,
    x_kind: bool,
    plus: bool,
    scale: f64,
) -> Vec<SpinMatrix> {
    let len = omega.len();
    for xi in 0..len {
        let xm = neg[xi];
        // X: a = e^{±}W̃, h = g = e^{∓}W.  Y: a = e^{±}W, h = g = e^{∓}W̃.
        let (a, h) = if x_kind {
            (hats.wt(plus, xm), hats.w(!plus, xi))
        } else {
            (hats.w(plus, xm), hats.wt(!plus, xi))
        };
        let sh = h * (a * h).j();
        for c in 0..4 {
            ws.planes[c][xi] = sh.m[c / 2][c % 2];
        }
    }
    for c in 0..4 {
        let (fft, scratch) = (&ws.fft, &mut ws.scratch);
        fft.inverse(&mut ws.planes[c], scratch);
    }
    let sign = if plus { 1.0 } else { -1.0 };
    (0..len)
        .map(|k| {
            let e = Complex64::from_polar(scale, sign * s * omega[k]);
            matrix(&ws.planes, k) * e
        })
        .collect()
}
