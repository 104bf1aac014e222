//! The four iterated sums of a separable test function over the collision measure.

use hbk::diagnostics::{fubini_swap_residual, QuadField};
use hbk::lattice::{Dispersion, SignVector, TorusGrid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

fn main() -> hbk::error::Result<()> {
    let grid = TorusGrid::new(1, 8)?;
    let band = Dispersion::nearest_neighbor(0.0).sample(&grid)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let mut v = || -> Vec<Complex64> { (0..8).map(|_| Complex64::new(rng.gen(), rng.gen())).collect() };
    let g = QuadField::separable(grid, &v(), &v(), &v(), &v())?;
    let rep = fubini_swap_residual(&band, &g, SignVector::COLLISION, 0.5, 0.3, 1e-12)?;
    println!("{}", rep.to_json());
    Ok(())
}
