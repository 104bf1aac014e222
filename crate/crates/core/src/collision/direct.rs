//! Direct `O(N^{3d})` summation over collision triples.
//!
//! Each output point `k₁` is independent. Within a point, the sum over `k₃`
//! runs sequentially for every fixed `k₂` and the per-`k₂` rows are combined
//! by a fixed pairwise tree, so results do not depend on the thread count.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{lorentz, CollisionParams, Components, Parts};
use crate::field::pairwise_sum;
use crate::lattice::Band;
use crate::spin::SpinMatrix;

/// Source of `k₄ = s − k₃` rows, `s = k₁ + k₂`.
pub(super) struct FourthIndex {
    table: Option<Vec<u32>>,
    len: usize,
}

impl FourthIndex {
    pub(super) fn new(band: &Band) -> Self {
        let grid = band.grid();
        Self {
            table: grid.sub_table(),
            len: grid.len(),
        }
    }

    /// Fills or borrows the row `k₃ ↦ s − k₃`.
    pub(super) fn row<'a>(&'a self, band: &Band, s: usize, buf: &'a mut Vec<u32>) -> &'a [u32] {
        match &self.table {
            Some(t) => &t[s * self.len..(s + 1) * self.len],
            None => {
                band.grid().sub_row(s, buf);
                buf
            }
        }
    }
}

#[derive(Clone, Copy, Default)]
struct Sums {
    a: SpinMatrix,
    b: SpinMatrix,
    h: SpinMatrix,
}

pub(super) fn components(band: &Band, params: &CollisionParams, w: &[SpinMatrix], parts: Parts) -> Components {
    let grid = band.grid();
    let len = grid.len();
    let eps = params.epsilon;
    let mode = params.pv_mode;
    let omega = band.values();
    let wt: Vec<SpinMatrix> = w.iter().map(SpinMatrix::tilde).collect();
    let fourth = FourthIndex::new(band);
    let norm = grid.weight() * grid.weight();

    let per_point: Vec<Sums> = (0..len)
        .into_par_iter()
        .map_init(Vec::new, |buf, k1| {
            let mut rows_a = Vec::with_capacity(len);
            let mut rows_b = Vec::with_capacity(len);
            let mut rows_h = Vec::with_capacity(len);
            for k2 in 0..len {
                let s = grid.add(k1, k2);
                let row = fourth.row(band, s, buf);
                let w2 = w[k2];
                let d12 = omega[k2];
                let mut acc = Sums::default();
                for k3 in 0..len {
                    let k4 = row[k3] as usize;
                    let x = (omega[k1] - omega[k4]) + (d12 - omega[k3]);
                    let (w3, w4) = (w[k3], w[k4]);
                    let p24 = w2 * w4;
                    if parts.diss {
                        let l = lorentz(x, eps);
                        // W̃₂W₄ = W₄ − W₂W₄ and W₂W̃₄ = W₂ − W₂W₄
                        let jx = (w4 - p24).j();
                        let jy = (w2 - p24).j();
                        acc.a += (w3 * jx) * l;
                        acc.b += (wt[k3] * jy) * l;
                    }
                    if parts.heff {
                        let p = mode.eval(x, eps);
                        if p != 0.0 {
                            let dj = (w4 - w2).j();
                            let p42 = w4 * w2;
                            let m = dj * w3 + w3 * dj + (w2 * 2.0 - p24 - p42).j();
                            acc.h += m * p;
                        }
                    }
                }
                rows_a.push(acc.a);
                rows_b.push(acc.b);
                rows_h.push(acc.h);
            }
            Sums {
                a: pairwise_sum(&rows_a) * norm,
                b: pairwise_sum(&rows_b) * norm,
                h: (pairwise_sum(&rows_h) * (-0.5 * norm)).hermitian_part(),
            }
        })
        .collect();

    Components {
        a: per_point.iter().map(|s| s.a).collect(),
        b: per_point.iter().map(|s| s.b).collect(),
        h: parts.heff.then(|| per_point.iter().map(|s| s.h).collect()),
    }
}

/// `H_eff` from the four-term symmetric integrand, written out literally.
pub(super) fn h_eff_symmetric(band: &Band, params: &CollisionParams, w: &[SpinMatrix]) -> Vec<SpinMatrix> {
    let grid = band.grid();
    let len = grid.len();
    let eps = params.epsilon;
    let mode = params.pv_mode;
    let wt: Vec<SpinMatrix> = w.iter().map(SpinMatrix::tilde).collect();
    let norm = grid.weight() * grid.weight();
    (0..len)
        .into_par_iter()
        .map(|k1| {
            let rows: Vec<SpinMatrix> = (0..len)
                .map(|k2| {
                    let mut acc = SpinMatrix::zero();
                    for k3 in 0..len {
                        let k4 = grid.fourth(k1, k2, k3);
                        let p = mode.eval(band.omega_underline(k1, k2, k3, k4), eps);
                        let m = w[k3] * (wt[k2] * w[k4]).j()
                            + (w[k4] * wt[k2]).j() * w[k3]
                            + wt[k3] * (w[k2] * wt[k4]).j()
                            + (wt[k4] * w[k2]).j() * wt[k3];
                        acc += m * p;
                    }
                    acc
                })
                .collect();
            (pairwise_sum(&rows) * (-0.5 * norm)).hermitian_part()
        })
        .collect()
}

/// `Σ_{k₂,k₃} f(k₁,k₂,k₃,k₄)` over a fixed point, in the deterministic order.
pub(super) fn triple_sum_c64(
    band: &Band,
    k1: usize,
    mut term: impl FnMut(usize, usize, usize) -> Complex64,
) -> Complex64 {
    let grid = band.grid();
    let len = grid.len();
    let rows: Vec<Complex64> = (0..len)
        .map(|k2| {
            let s = grid.add(k1, k2);
            let mut acc = Complex64::new(0.0, 0.0);
            for k3 in 0..len {
                acc += term(k2, k3, grid.sub(s, k3));
            }
            acc
        })
        .collect();
    crate::field::pairwise_sum_c64(&rows)
}

pub(super) fn off_shell_energy_rate(band: &Band, eps: f64, w: &[SpinMatrix]) -> f64 {
    let grid = band.grid();
    let len = grid.len();
    let wt: Vec<SpinMatrix> = w.iter().map(SpinMatrix::tilde).collect();
    let per_point: Vec<f64> = (0..len)
        .into_par_iter()
        .map(|k1| {
            triple_sum_c64(band, k1, |k2, k3, k4| {
                let x = band.omega_underline(k1, k2, k3, k4);
                let t = wt[k1] * w[k3] * (wt[k2] * w[k4]).j() + (w[k4] * wt[k2]).j() * w[k3] * wt[k1]
                    - w[k1] * wt[k3] * (w[k2] * wt[k4]).j()
                    - (wt[k4] * w[k2]).j() * wt[k3] * w[k1];
                t.trace() * (0.25 * x * lorentz(x, eps))
            })
            .re
        })
        .collect();
    crate::field::pairwise_sum_f64(&per_point) * grid.weight().powi(3)
}
