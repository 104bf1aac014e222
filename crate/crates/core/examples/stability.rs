//! Growth of the distance between two nearby trajectories.

use hbk::collision::{CollisionOperator, CollisionParams};
use hbk::evolution::{stability_vs_initial_data, IntegratorConfig, Scheme};
use hbk::field::WignerField;
use hbk::lattice::{Dispersion, TorusGrid};
use rand::SeedableRng;

fn main() -> hbk::error::Result<()> {
    let grid = TorusGrid::new(1, 16)?;
    let op = CollisionOperator::new(
        Dispersion::nearest_neighbor(0.0).sample(&grid)?,
        CollisionParams::new(0.5),
    )?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let w0 = WignerField::random_with_spectrum(grid, &mut rng, 0.1, 0.9);
    let kick = WignerField::random_hermitian(grid, &mut rng, 1e-6);
    let w1 = w0.zip_map(&kick, |a, b| *a + *b)?;
    let cfg = IntegratorConfig {
        record_every: 10,
        ..IntegratorConfig::new(Scheme::Rk4, 0.01, 1.0)
    };
    let rep = stability_vs_initial_data(&op, &w0, &w1, &cfg)?;
    for (t, r) in rep.times.iter().zip(&rep.ratio) {
        println!("t = {t:.2}  ratio {r:.5}");
    }
    println!("fitted C = {:.4}", rep.fitted_c);
    Ok(())
}
