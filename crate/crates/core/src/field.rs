//! Grid-indexed fields of 2×2 matrices.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use rand::Rng;

use crate::error::{HbkError, Result};
use crate::lattice::{Band, TorusGrid};
use crate::spin::SpinMatrix;

/// A map `k ↦ W(k)` on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerField {
    grid: TorusGrid,
    data: Vec<SpinMatrix>,
}

impl WignerField {
    pub fn new(grid: TorusGrid, data: Vec<SpinMatrix>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(HbkError::GridMismatch(format!(
                "field has {} points, grid has {}",
                data.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, data })
    }

    pub fn constant(grid: TorusGrid, m: SpinMatrix) -> Self {
        Self {
            grid,
            data: vec![m; grid.len()],
        }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self::constant(grid, SpinMatrix::zero())
    }

    pub fn from_fn(grid: TorusGrid, f: impl FnMut(usize) -> SpinMatrix) -> Self {
        Self {
            grid,
            data: (0..grid.len()).map(f).collect(),
        }
    }

    /// `W(k) = w(k)·I`.
    pub fn scalar(grid: TorusGrid, w: &[f64]) -> Result<Self> {
        Self::new(grid, w.iter().map(|&x| SpinMatrix::scalar(x)).collect())
    }

    /// `W(k) = diag(up(k), down(k))`.
    pub fn diagonal(grid: TorusGrid, up: &[f64], down: &[f64]) -> Result<Self> {
        if up.len() != down.len() {
            return Err(HbkError::GridMismatch("spin components differ in length".into()));
        }
        Self::new(
            grid,
            up.iter().zip(down).map(|(&a, &b)| SpinMatrix::diag(a, b)).collect(),
        )
    }

    /// Independent random Fermi matrices at each point.
    pub fn random_fermi<R: Rng + ?Sized>(grid: TorusGrid, rng: &mut R) -> Self {
        Self::from_fn(grid, |_| SpinMatrix::random_fermi(rng))
    }

    /// Random Hermitian matrices with spectra in `[lo, hi]`.
    pub fn random_with_spectrum<R: Rng + ?Sized>(grid: TorusGrid, rng: &mut R, lo: f64, hi: f64) -> Self {
        Self::from_fn(grid, |_| SpinMatrix::random_with_spectrum(rng, lo, hi))
    }

    pub fn random_hermitian<R: Rng + ?Sized>(grid: TorusGrid, rng: &mut R, scale: f64) -> Self {
        Self::from_fn(grid, |_| SpinMatrix::random_hermitian(rng, scale))
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[SpinMatrix] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [SpinMatrix] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<SpinMatrix> {
        self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SpinMatrix> {
        self.data.iter()
    }

    pub fn map(&self, f: impl Fn(&SpinMatrix) -> SpinMatrix) -> Self {
        Self {
            grid: self.grid,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(&SpinMatrix, &SpinMatrix) -> SpinMatrix) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(HbkError::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }

    /// `W̃ = I − W` pointwise.
    pub fn tilde(&self) -> Self {
        self.map(SpinMatrix::tilde)
    }

    /// `W + a·V`.
    pub fn axpy(&self, a: f64, v: &Self) -> Self {
        Self {
            grid: self.grid,
            data: self.data.iter().zip(&v.data).map(|(w, x)| *w + *x * a).collect(),
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|m| *m * a)
    }

    /// Pointwise `(M + M*)/2`; returns the largest Hilbert–Schmidt residual
    /// removed.
    pub fn symmetrize(&mut self) -> f64 {
        let mut worst: f64 = 0.0;
        for m in self.data.iter_mut() {
            worst = worst.max(m.hermiticity_residual());
            *m = m.hermitian_part();
        }
        worst
    }

    pub fn herm_residual(&self) -> f64 {
        self.data.iter().map(|m| m.hermiticity_residual()).fold(0.0, f64::max)
    }

    /// `max_k max(−λ_min, λ_max − 1, 0)`.
    pub fn fermi_residual(&self) -> f64 {
        self.data.iter().map(|m| m.fermi_violation()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.data
            .iter()
            .map(|m| m.min_eigenvalue())
            .fold(f64::INFINITY, f64::min)
    }

    /// `‖W‖₂ = (N^{−d} Σ_k tr W*W)^{1/2}`.
    pub fn norm_l2(&self) -> f64 {
        (self.data.iter().map(|m| m.norm_sqr()).sum::<f64>() * self.grid.weight()).sqrt()
    }

    /// `max_k ‖W(k)‖` in the Hilbert–Schmidt norm.
    pub fn norm_inf(&self) -> f64 {
        self.data.iter().map(|m| m.norm()).fold(0.0, f64::max)
    }

    pub fn dist_l2(&self, other: &Self) -> f64 {
        let sum: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).norm_sqr())
            .sum();
        (sum * self.grid.weight()).sqrt()
    }

    pub fn dist_inf(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).norm())
            .fold(0.0, f64::max)
    }

    /// `N^{−d} Σ_k W(k)`.
    pub fn mean(&self) -> SpinMatrix {
        pairwise_sum(&self.data) * self.grid.weight()
    }

    /// `N^{−d} Σ_k ω(k) tr W(k)`.
    pub fn energy(&self, band: &Band) -> f64 {
        let terms: Vec<f64> = self
            .data
            .iter()
            .zip(band.values())
            .map(|(m, w)| w * m.trace().re)
            .collect();
        pairwise_sum_f64(&terms) * self.grid.weight()
    }

    /// Restriction of a field on a refined grid to the points of `coarse`.
    pub fn subsample(&self, coarse: &TorusGrid) -> Result<Self> {
        if !self.grid.refines(coarse) {
            return Err(HbkError::GridMismatch(format!(
                "{:?} does not refine {:?}",
                self.grid, coarse
            )));
        }
        Ok(Self::from_fn(*coarse, |j| self.data[self.grid.embed_from(coarse, j)]))
    }

    /// Entry `(i, j)` of every matrix as a scalar field.
    pub fn component(&self, i: usize, j: usize) -> Vec<Complex64> {
        self.data.iter().map(|m| m.m[i][j]).collect()
    }
}

impl Index<usize> for WignerField {
    type Output = SpinMatrix;
    fn index(&self, k: usize) -> &SpinMatrix {
        &self.data[k]
    }
}

impl IndexMut<usize> for WignerField {
    fn index_mut(&mut self, k: usize) -> &mut SpinMatrix {
        &mut self.data[k]
    }
}

/// Tree reduction with a fixed association order.
pub fn pairwise_sum(xs: &[SpinMatrix]) -> SpinMatrix {
    match xs.len() {
        0 => SpinMatrix::zero(),
        1 => xs[0],
        n if n <= 8 => xs.iter().copied().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

pub fn pairwise_sum_f64(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum_f64(a) + pairwise_sum_f64(b)
        }
    }
}

pub fn pairwise_sum_c64(xs: &[Complex64]) -> Complex64 {
    match xs.len() {
        0 => Complex64::new(0.0, 0.0),
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum_c64(a) + pairwise_sum_c64(b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Dispersion;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn norms_of_constant_field() {
        let g = TorusGrid::new(2, 4).unwrap();
        let w = WignerField::constant(g, SpinMatrix::diag(0.6, 0.8));
        assert!((w.norm_l2() - 1.0).abs() < 1e-15);
        assert!((w.norm_inf() - 1.0).abs() < 1e-15);
        assert!(w.mean().max_abs_diff(&SpinMatrix::diag(0.6, 0.8)) < 1e-15);
    }

    #[test]
    fn fermi_residual_examples() {
        let g = TorusGrid::new(1, 4).unwrap();
        assert_eq!(WignerField::constant(g, SpinMatrix::scalar(0.5)).fermi_residual(), 0.0);
        let r = WignerField::constant(g, SpinMatrix::diag(1.1, 0.5)).fermi_residual();
        assert!((r - 0.1).abs() < 1e-15);
        let r = WignerField::constant(g, SpinMatrix::scalar(-0.05)).fermi_residual();
        assert!((r - 0.05).abs() < 1e-15);
    }

    #[test]
    fn random_fermi_fields_are_fermi() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = TorusGrid::new(1, 32).unwrap();
        let w = WignerField::random_fermi(g, &mut rng);
        assert!(w.fermi_residual() < 1e-15);
        assert!(w.herm_residual() < 1e-15);
    }

    #[test]
    fn energy_of_scalar_field() {
        let g = TorusGrid::new(1, 8).unwrap();
        let band = Dispersion::nearest_neighbor(0.5).sample(&g).unwrap();
        let w = WignerField::constant(g, SpinMatrix::identity());
        // 2 · mean(ω) = 2c
        assert!((w.energy(&band) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn subsample_picks_coarse_points() {
        let fine = TorusGrid::new(1, 8).unwrap();
        let coarse = TorusGrid::new(1, 4).unwrap();
        let w = WignerField::from_fn(fine, |j| SpinMatrix::scalar(j as f64));
        let s = w.subsample(&coarse).unwrap();
        let vals: Vec<f64> = s.iter().map(|m| m.m[0][0].re).collect();
        assert_eq!(vals, vec![0.0, 2.0, 4.0, 6.0]);
    }
}
