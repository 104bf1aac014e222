//! Direct O(N^{2d}) sums against the FFT-based spectral backend.

use std::time::Instant;

use hbk::collision::{Backend, CollisionOperator, CollisionParams};
use hbk::field::WignerField;
use hbk::lattice::{Dispersion, TorusGrid};
use rand::SeedableRng;

fn main() -> hbk::error::Result<()> {
    let grid = TorusGrid::new(2, 12)?;
    let band = Dispersion::nearest_neighbor(0.0).sample(&grid)?;
    let params = CollisionParams::new(1.1);
    let direct = CollisionOperator::new(band.clone(), params)?;
    let spectral = CollisionOperator::new(band, params.with_backend(Backend::Spectral))?;
    let w = WignerField::random_fermi(grid, &mut rand_chacha::ChaCha8Rng::seed_from_u64(3));

    let t = Instant::now();
    let a = direct.collision_full(&w)?;
    let td = t.elapsed();
    let t = Instant::now();
    let b = spectral.collision_full(&w)?;
    let ts = t.elapsed();
    println!("direct {td:?}, spectral {ts:?}");
    println!("relative difference {:.3e}", a.dist_l2(&b) / a.norm_l2());
    Ok(())
}
