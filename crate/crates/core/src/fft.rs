//! Unnormalized d-dimensional DFTs on a cubic grid, built from 1-D `rustfft`
//! plans applied axis by axis.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub struct FftNd {
    n: usize,
    d: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch_len: usize,
}

impl std::fmt::Debug for FftNd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftNd").field("n", &self.n).field("d", &self.d).finish()
    }
}

impl FftNd {
    pub fn new(n: usize, d: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len()) + n;
        Self {
            n,
            d,
            forward,
            inverse,
            scratch_len,
        }
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn make_scratch(&self) -> Vec<Complex64> {
        vec![Complex64::default(); self.scratch_len]
    }

    /// `x̂(ξ) = Σ_j x(j) e^{−2πi ξ·j/N}`.
    pub fn forward(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        self.run(&*self.forward, data, scratch);
    }

    /// `x(j) = Σ_ξ x̂(ξ) e^{+2πi ξ·j/N}` (no `1/N^d` factor).
    pub fn inverse(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        self.run(&*self.inverse, data, scratch);
    }

    fn run(&self, plan: &dyn Fft<f64>, data: &mut [Complex64], scratch: &mut [Complex64]) {
        let n = self.n;
        debug_assert_eq!(data.len(), self.len());
        let (line, work) = scratch.split_at_mut(n);
        for axis in 0..self.d {
            let stride = n.pow((self.d - 1 - axis) as u32);
            if stride == 1 {
                for chunk in data.chunks_exact_mut(n) {
                    plan.process_with_scratch(chunk, work);
                }
                continue;
            }
            let block = stride * n;
            for base in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    let start = base + offset;
                    for (i, slot) in line.iter_mut().enumerate() {
                        *slot = data[start + i * stride];
                    }
                    plan.process_with_scratch(line, work);
                    for (i, value) in line.iter().enumerate() {
                        data[start + i * stride] = *value;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(data: &[Complex64], n: usize, d: usize, sign: f64) -> Vec<Complex64> {
        let len = n.pow(d as u32);
        let digits = |mut j: usize| {
            let mut out = vec![0usize; d];
            for slot in out.iter_mut().rev() {
                *slot = j % n;
                j /= n;
            }
            out
        };
        (0..len)
            .map(|xi| {
                let a = digits(xi);
                (0..len)
                    .map(|j| {
                        let b = digits(j);
                        let dot: usize = a.iter().zip(&b).map(|(p, q)| p * q).sum();
                        let phase = sign * std::f64::consts::TAU * (dot % n) as f64 / n as f64;
                        data[j] * Complex64::from_polar(1.0, phase)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_in_two_and_three_dimensions() {
        for (n, d) in [(6usize, 1usize), (4, 2), (4, 3)] {
            let fft = FftNd::new(n, d);
            let data: Vec<Complex64> = (0..fft.len())
                .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
                .collect();
            let mut scratch = fft.make_scratch();
            let mut fwd = data.clone();
            fft.forward(&mut fwd, &mut scratch);
            let expect = naive_dft(&data, n, d, -1.0);
            for (a, b) in fwd.iter().zip(&expect) {
                assert!((a - b).norm() < 1e-12);
            }
            let mut back = fwd.clone();
            fft.inverse(&mut back, &mut scratch);
            for (a, b) in back.iter().zip(&data) {
                assert!((a / fft.len() as f64 - b).norm() < 1e-13);
            }
        }
    }
}
