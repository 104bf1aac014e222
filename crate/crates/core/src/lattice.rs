//! The discretized torus `T^d`, dispersion relations and energy combinations.
//!
//! Grid points sit at `k = j/N` for `j ∈ {0,…,N−1}^d`; the linear index is
//! row-major with the last axis fastest. Index arithmetic is exact modular
//! integer arithmetic, so momentum conservation `k₁ + k₂ − k₃ − k₄ ≡ 0` holds
//! with no rounding. Coordinates are reported in `[−1/2, 1/2)^d`.

use std::f64::consts::TAU;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{HbkError, Result};
use crate::fft::FftNd;

pub const MAX_DIM: usize = 3;

/// Largest grid for which the full `k_a − k_b` table is cached.
const SUB_TABLE_MAX_LEN: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct TorusGrid {
    d: usize,
    n: usize,
}

impl TorusGrid {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&d) {
            return Err(HbkError::InvalidGrid(format!("dimension {d} outside 1..=3")));
        }
        if n < 4 || !n.is_multiple_of(2) {
            return Err(HbkError::InvalidGrid(format!(
                "points per axis must be even and >= 4, got {n}"
            )));
        }
        Ok(Self { d, n })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of grid points, `N^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `N^{−d}` of a single point.
    pub fn weight(&self) -> f64 {
        1.0 / self.len() as f64
    }

    pub fn coords(&self, mut idx: usize) -> [usize; MAX_DIM] {
        let mut out = [0usize; MAX_DIM];
        for axis in (0..self.d).rev() {
            out[axis] = idx % self.n;
            idx /= self.n;
        }
        out
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords[..self.d].iter().fold(0, |acc, &c| acc * self.n + (c % self.n))
    }

    /// Index of the lattice vector with signed components `x` (taken mod N).
    pub fn index_signed(&self, x: &[i64]) -> usize {
        let n = self.n as i64;
        x[..self.d]
            .iter()
            .fold(0, |acc, &c| acc * self.n + c.rem_euclid(n) as usize)
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.combine(a, b, |x, y, n| (x + y) % n)
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.combine(a, b, |x, y, n| (x + n - y) % n)
    }

    pub fn neg(&self, a: usize) -> usize {
        self.sub(0, a)
    }

    fn combine(&self, a: usize, b: usize, op: impl Fn(usize, usize, usize) -> usize) -> usize {
        let (ca, cb) = (self.coords(a), self.coords(b));
        let mut out = [0usize; MAX_DIM];
        for axis in 0..self.d {
            out[axis] = op(ca[axis], cb[axis], self.n);
        }
        self.index(&out)
    }

    /// `k₄ = k₁ + k₂ − k₃` on the grid.
    pub fn fourth(&self, k1: usize, k2: usize, k3: usize) -> usize {
        self.sub(self.add(k1, k2), k3)
    }

    /// Wavevector of a grid point in `[−1/2, 1/2)^d`.
    pub fn point(&self, idx: usize) -> [f64; MAX_DIM] {
        let c = self.coords(idx);
        let mut out = [0.0; MAX_DIM];
        for axis in 0..self.d {
            let j = c[axis] as f64 / self.n as f64;
            out[axis] = if j >= 0.5 { j - 1.0 } else { j };
        }
        out
    }

    /// Euclidean length of the minimal representative of a grid point.
    pub fn torus_norm(&self, idx: usize) -> f64 {
        self.point(idx).iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Table of `a − b` for all index pairs, or `None` for grids too large to
    /// cache.
    pub fn sub_table(&self) -> Option<Vec<u32>> {
        let len = self.len();
        if len > SUB_TABLE_MAX_LEN {
            return None;
        }
        let mut table = Vec::with_capacity(len * len);
        for a in 0..len {
            table.extend((0..len).map(|b| self.sub(a, b) as u32));
        }
        Some(table)
    }

    /// Row `b ↦ a − b` for a fixed `a`.
    pub fn sub_row(&self, a: usize, row: &mut Vec<u32>) {
        row.clear();
        row.extend((0..self.len()).map(|b| self.sub(a, b) as u32));
    }

    /// Whether `self` is obtained from `coarse` by integer refinement, so that
    /// every coarse point is also a point of `self`.
    pub fn refines(&self, coarse: &TorusGrid) -> bool {
        self.d == coarse.d && self.n.is_multiple_of(coarse.n)
    }

    /// Index in `self` of point `idx` of a coarser grid.
    pub fn embed_from(&self, coarse: &TorusGrid, idx: usize) -> usize {
        let factor = self.n / coarse.n;
        let c = coarse.coords(idx);
        let mut fine = [0usize; MAX_DIM];
        for axis in 0..self.d {
            fine[axis] = c[axis] * factor;
        }
        self.index(&fine)
    }
}

/// A sign vector `σ ∈ {−1, +1}^4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "[i8; 4]", into = "[i8; 4]")]
pub struct SignVector([i8; 4]);

impl SignVector {
    /// The collision combination `(1, 1, −1, −1)`.
    pub const COLLISION: SignVector = SignVector([1, 1, -1, -1]);

    pub fn new(s: [i8; 4]) -> Result<Self> {
        if s.iter().all(|&x| x == 1 || x == -1) {
            Ok(Self(s))
        } else {
            Err(HbkError::config("sigma", format!("entries must be ±1, got {s:?}")))
        }
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i] as f64
    }

    pub fn entries(&self) -> [i8; 4] {
        self.0
    }

    /// `(σ₂, σ₁, σ₃, σ₄)`.
    pub fn swap_second(&self) -> Self {
        let s = self.0;
        Self([s[1], s[0], s[2], s[3]])
    }

    /// `(σ₃, σ₂, σ₁, σ₄)`.
    pub fn swap_third(&self) -> Self {
        let s = self.0;
        Self([s[2], s[1], s[0], s[3]])
    }

    /// `(σ₄, σ₂, σ₁, σ₃)`.
    pub fn swap_fourth(&self) -> Self {
        let s = self.0;
        Self([s[3], s[1], s[0], s[2]])
    }

    pub fn all() -> impl Iterator<Item = SignVector> {
        (0..16u8).map(|bits| {
            let mut s = [1i8; 4];
            for (i, slot) in s.iter_mut().enumerate() {
                if bits & (1 << i) != 0 {
                    *slot = -1;
                }
            }
            SignVector(s)
        })
    }
}

impl TryFrom<[i8; 4]> for SignVector {
    type Error = HbkError;
    fn try_from(s: [i8; 4]) -> Result<Self> {
        Self::new(s)
    }
}

impl From<SignVector> for [i8; 4] {
    fn from(s: SignVector) -> Self {
        s.0
    }
}

/// A dispersion relation `ω : T^d → ℝ`.
#[derive(Debug, Clone, PartialEq)]
pub enum Dispersion {
    /// `ω(k) = c − Σ_ν cos(2π k^ν)`.
    NearestNeighbor { c: f64 },
    /// Values on a fixed grid, reflection-symmetrized on construction.
    Tabulated { grid: TorusGrid, values: Vec<f64> },
}

impl Dispersion {
    pub fn nearest_neighbor(c: f64) -> Self {
        Dispersion::NearestNeighbor { c }
    }

    /// Builds a tabulated dispersion, averaging `ω(j)` with `ω(−j)`.
    pub fn tabulated(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(HbkError::GridMismatch(format!(
                "tabulated dispersion has {} values, grid has {}",
                values.len(),
                grid.len()
            )));
        }
        let mut asym: f64 = 0.0;
        let sym: Vec<f64> = (0..grid.len())
            .map(|j| {
                let mirror = values[grid.neg(j)];
                asym = asym.max((values[j] - mirror).abs());
                0.5 * (values[j] + mirror)
            })
            .collect();
        if asym > 1e-12 {
            log::warn!("tabulated dispersion violates ω(−k) = ω(k) by up to {asym:.3e}; symmetrized");
        }
        Ok(Dispersion::Tabulated { grid, values: sym })
    }

    /// Reads a CSV table with header `j1,...,jd,omega` and `N^d` rows.
    pub fn from_csv(path: &Path, grid: TorusGrid) -> Result<Self> {
        let mut cols = read_grid_csv(path, &grid, &["omega"])?;
        Self::tabulated(grid, cols.remove(0))
    }

    /// Evaluates the nearest-neighbor dispersion at a continuum point.
    pub fn eval_continuum(c: f64, k: &[f64]) -> f64 {
        c - k.iter().map(|x| (TAU * x).cos()).sum::<f64>()
    }

    /// Samples `ω` on every point of `grid`.
    pub fn sample(&self, grid: &TorusGrid) -> Result<Band> {
        let omega = match self {
            Dispersion::NearestNeighbor { c } => {
                // cos table per axis keeps ω(−j) = ω(j) bit-exact
                let n = grid.n();
                let cos: Vec<f64> = (0..n)
                    .map(|j| {
                        let m = j.min(n - j);
                        (TAU * m as f64 / n as f64).cos()
                    })
                    .collect();
                (0..grid.len())
                    .map(|j| {
                        let coords = grid.coords(j);
                        c - coords[..grid.dim()].iter().map(|&x| cos[x]).sum::<f64>()
                    })
                    .collect()
            }
            Dispersion::Tabulated { grid: own, values } => {
                if own != grid {
                    return Err(HbkError::GridMismatch(format!(
                        "tabulated dispersion defined on {own:?}, requested {grid:?}"
                    )));
                }
                values.clone()
            }
        };
        Ok(Band {
            grid: *grid,
            omega,
            lipschitz: self.lipschitz_bound(grid),
        })
    }

    /// Lipschitz bound of `ω` in the Euclidean metric of the torus.
    pub fn lipschitz_bound(&self, grid: &TorusGrid) -> f64 {
        match self {
            Dispersion::NearestNeighbor { .. } => TAU * grid.dim() as f64,
            Dispersion::Tabulated { grid: own, values } => {
                // largest discrete gradient along any axis
                let n = own.n() as f64;
                let mut worst: f64 = 0.0;
                for j in 0..own.len() {
                    let mut grad2 = 0.0;
                    for axis in 0..own.dim() {
                        let mut c = own.coords(j);
                        c[axis] = (c[axis] + 1) % own.n();
                        let diff = (values[own.index(&c)] - values[j]) * n;
                        grad2 += diff * diff;
                    }
                    worst = worst.max(grad2.sqrt());
                }
                worst
            }
        }
    }
}

/// A dispersion relation sampled on a grid.
#[derive(Debug, Clone)]
pub struct Band {
    grid: TorusGrid,
    omega: Vec<f64>,
    lipschitz: f64,
}

impl Band {
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.omega
    }

    pub fn omega(&self, j: usize) -> f64 {
        self.omega[j]
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn range(&self) -> (f64, f64) {
        self.omega
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &w| {
                (lo.min(w), hi.max(w))
            })
    }

    /// `ω₁ + ω₂ − ω₃ − ω₄`.
    pub fn omega_underline(&self, k1: usize, k2: usize, k3: usize, k4: usize) -> f64 {
        // grouped so the swap symmetries hold bit-exactly
        (self.omega[k1] - self.omega[k4]) + (self.omega[k2] - self.omega[k3])
    }

    /// `σ₁ω(k₁) + σ₂ω(k₂) + σ₃ω(k₃) + σ₄ω(k₁ + k₂ − k₃)`.
    pub fn omega_tilde(&self, k: [usize; 3], sigma: SignVector) -> f64 {
        let k4 = self.grid.fourth(k[0], k[1], k[2]);
        (sigma.get(0) * self.omega[k[0]] + sigma.get(3) * self.omega[k4])
            + (sigma.get(1) * self.omega[k[1]] + sigma.get(2) * self.omega[k[2]])
    }

    /// `sup |Ω̃(·, σ)|` over all grid triples, from the band extrema.
    pub fn omega_tilde_bound(&self, sigma: SignVector) -> f64 {
        let (lo, hi) = self.range();
        let (mut min, mut max) = (0.0, 0.0);
        for i in 0..4 {
            let s = sigma.get(i);
            let (a, b) = (s * lo, s * hi);
            min += a.min(b);
            max += a.max(b);
        }
        f64::max(-min, max)
    }

    /// `p_t(x)` at every lattice site `x` resolvable on the grid, indexed like
    /// the grid (site `x` stored at index `x mod N`).
    pub fn free_propagator_field(&self, t: f64) -> Vec<Complex64> {
        let fft = FftNd::new(self.grid.n(), self.grid.dim());
        let mut data: Vec<Complex64> = self.omega.iter().map(|&w| Complex64::from_polar(1.0, -t * w)).collect();
        let mut scratch = fft.make_scratch();
        fft.inverse(&mut data, &mut scratch);
        let scale = self.grid.weight();
        data.iter_mut().for_each(|z| *z *= scale);
        data
    }

    /// `p_t(x) ≈ N^{−d} Σ_j e^{2πi x·j/N} e^{−itω(j/N)}` for `|x^ν| ≤ N/2`.
    pub fn free_propagator(&self, t: f64, x: &[i64]) -> Result<Complex64> {
        let half = (self.grid.n() / 2) as i64;
        if x[..self.grid.dim()].iter().any(|c| c.abs() > half) {
            return Err(HbkError::InvalidGrid(format!(
                "site {x:?} not resolvable on N = {}",
                self.grid.n()
            )));
        }
        Ok(self.free_propagator_field(t)[self.grid.index_signed(x)])
    }
}

/// Reads a CSV file with header `j1,...,jd,<columns>` holding exactly one
/// row per grid point; lines starting with `#` are skipped. Returns one
/// vector per value column in grid order.
pub fn read_grid_csv(path: &Path, grid: &TorusGrid, columns: &[&str]) -> Result<Vec<Vec<f64>>> {
    let format_err = |message: String| HbkError::Format {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => HbkError::Io(io),
            other => format_err(format!("{other:?}")),
        })?;
    let d = grid.dim();
    let mut expected: Vec<String> = (1..=d).map(|i| format!("j{i}")).collect();
    expected.extend(columns.iter().map(|c| c.to_string()));
    let header = reader.headers().map_err(|e| format_err(e.to_string()))?;
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(format_err(format!(
            "expected header {}, found {}",
            expected.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = vec![vec![f64::NAN; grid.len()]; columns.len()];
    let mut rows = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| format_err(e.to_string()))?;
        let mut coords = [0usize; MAX_DIM];
        for (axis, c) in coords.iter_mut().enumerate().take(d) {
            let j: usize = record[axis]
                .parse()
                .map_err(|_| format_err(format!("bad index `{}` on row {}", &record[axis], rows + 1)))?;
            if j >= grid.n() {
                return Err(format_err(format!("index {j} out of range on row {}", rows + 1)));
            }
            *c = j;
        }
        let idx = grid.index(&coords);
        for (col, values) in out.iter_mut().enumerate() {
            values[idx] = record[d + col]
                .parse()
                .map_err(|_| format_err(format!("bad value `{}` on row {}", &record[d + col], rows + 1)))?;
        }
        rows += 1;
    }
    if rows != grid.len() || out.iter().flatten().any(|v| v.is_nan()) {
        return Err(format_err(format!(
            "expected {} distinct rows, found {rows}",
            grid.len()
        )));
    }
    Ok(out)
}

pub fn dispersion_nn(k: &[f64], c: f64) -> f64 {
    Dispersion::eval_continuum(c, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nn_band(d: usize, n: usize, c: f64) -> Band {
        Dispersion::nearest_neighbor(c)
            .sample(&TorusGrid::new(d, n).unwrap())
            .unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(TorusGrid::new(0, 8).is_err());
        assert!(TorusGrid::new(4, 8).is_err());
        assert!(TorusGrid::new(1, 5).is_err());
        assert!(TorusGrid::new(1, 2).is_err());
        let g = TorusGrid::new(3, 4).unwrap();
        assert_eq!(g.len(), 64);
        assert_eq!(g.weight() * g.len() as f64, 1.0);
    }

    #[test]
    fn index_arithmetic_is_exact() {
        let g = TorusGrid::new(2, 6).unwrap();
        for a in 0..g.len() {
            assert_eq!(g.add(a, g.neg(a)), 0);
            for b in 0..g.len() {
                assert_eq!(g.sub(g.add(a, b), b), a);
                let ca = g.coords(a);
                let cb = g.coords(b);
                let s = g.coords(g.add(a, b));
                for axis in 0..2 {
                    assert_eq!(s[axis], (ca[axis] + cb[axis]) % 6);
                }
            }
        }
        let table = g.sub_table().unwrap();
        assert_eq!(table[5 * g.len() + 7] as usize, g.sub(5, 7));
    }

    #[test]
    fn points_are_reported_in_half_open_box() {
        let g = TorusGrid::new(1, 8).unwrap();
        assert_eq!(g.point(4)[0], -0.5);
        assert_eq!(g.point(3)[0], 0.375);
        assert_eq!(g.point(7)[0], -0.125);
    }

    #[test]
    fn nearest_neighbor_values() {
        assert_eq!(dispersion_nn(&[0.0, 0.0, 0.0], 0.0), -3.0);
        assert!((dispersion_nn(&[0.5, 0.5, 0.5], 0.0) - 3.0).abs() < 1e-15);
        let band = nn_band(3, 8, 0.3);
        for j in 0..band.grid().len() {
            assert_eq!(band.omega(j), band.omega(band.grid().neg(j)));
        }
    }

    #[test]
    fn omega_tilde_examples() {
        let band = nn_band(1, 4, 0.0);
        assert_eq!(band.omega_tilde([0, 0, 0], SignVector::COLLISION), 0.0);
        let all_plus = SignVector::new([1, 1, 1, 1]).unwrap();
        assert_eq!(band.omega_tilde([0, 0, 0], all_plus), -4.0);
        let g = *band.grid();
        for k1 in 0..4 {
            for k2 in 0..4 {
                for k3 in 0..4 {
                    let k4 = g.fourth(k1, k2, k3);
                    assert_eq!(g.sub(g.add(k1, k2), g.add(k3, k4)), 0);
                    assert_eq!(
                        band.omega_tilde([k1, k2, k3], SignVector::COLLISION),
                        band.omega_underline(k1, k2, k3, k4)
                    );
                    assert_eq!(band.omega_underline(k1, k2, k2, k1), 0.0);
                }
            }
        }
    }

    #[test]
    fn omega_underline_swap_symmetries() {
        let band = nn_band(2, 6, 0.1);
        let g = *band.grid();
        for k1 in (0..g.len()).step_by(5) {
            for k2 in 0..g.len() {
                for k3 in (0..g.len()).step_by(3) {
                    let k4 = g.fourth(k1, k2, k3);
                    let w = band.omega_underline(k1, k2, k3, k4);
                    assert_eq!(band.omega_underline(k3, k4, k1, k2), -w);
                    assert_eq!(band.omega_underline(k2, k1, k4, k3), w);
                }
            }
        }
    }

    #[test]
    fn signvector_permutations() {
        let s = SignVector::new([1, -1, 1, -1]).unwrap();
        assert_eq!(s.swap_second().entries(), [-1, 1, 1, -1]);
        assert_eq!(s.swap_third().entries(), [1, -1, 1, -1]);
        assert_eq!(s.swap_fourth().entries(), [-1, -1, 1, 1]);
        assert!(SignVector::new([1, 0, 1, 1]).is_err());
        assert_eq!(SignVector::all().count(), 16);
    }

    #[test]
    fn free_propagator_at_time_zero_is_delta() {
        let band = nn_band(2, 8, 0.0);
        let p = band.free_propagator_field(0.0);
        assert!((p[0] - 1.0).norm() < 1e-15);
        assert!(p[1..].iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn free_propagator_symmetries_and_bound() {
        let band = nn_band(1, 64, 0.4);
        for &t in &[0.3, 2.5, 7.0] {
            for x in -10i64..=10 {
                let p = band.free_propagator(t, &[x]).unwrap();
                let q = band.free_propagator(-t, &[x]).unwrap();
                let r = band.free_propagator(t, &[-x]).unwrap();
                assert!(p.norm() <= 1.0 + 1e-14);
                assert!((q - p.conj()).norm() < 1e-14);
                assert!((r - p).norm() < 1e-14);
            }
        }
        assert!(band.free_propagator(1.0, &[40]).is_err());
    }

    #[test]
    fn tabulated_is_symmetrized() {
        let g = TorusGrid::new(1, 4).unwrap();
        let disp = Dispersion::tabulated(g, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let band = disp.sample(&g).unwrap();
        assert_eq!(band.values(), &[0.0, 2.0, 2.0, 2.0]);
        assert!(disp.sample(&TorusGrid::new(1, 8).unwrap()).is_err());
        assert!(Dispersion::tabulated(g, vec![0.0; 3]).is_err());
    }
}
