//! Evaluating the collision operator, its gain/loss split and H_eff.

use hbk::collision::{mollify, CollisionOperator, CollisionParams, PvMode};
use hbk::field::WignerField;
use hbk::lattice::{Dispersion, TorusGrid};
use rand::SeedableRng;

fn main() -> hbk::error::Result<()> {
    let grid = TorusGrid::new(1, 32)?;
    let band = Dispersion::nearest_neighbor(0.0).sample(&grid)?;
    let op = CollisionOperator::new(band, CollisionParams::new(0.3))?;
    println!("epsilon floor for the direct backend: {:.4}", op.eps_floor());

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let w = mollify(&WignerField::random_fermi(grid, &mut rng), 0.1)?;

    let c = op.collision_full(&w)?;
    println!("|C[W]|_2 = {:.4e}, |mean C[W]| = {:.2e}", c.norm_l2(), c.mean().norm());
    println!(
        "energy production {:.4e} (off-shell prediction {:.4e})",
        c.energy(op.band()),
        op.off_shell_energy_rate(&w)?
    );
    println!("min eig of gain: {:.3e}", op.gain(&w)?.min_eigenvalue());

    let h = op.h_eff(&w)?;
    let sharp = CollisionOperator::new(op.band().clone(), op.params().with_pv_mode(PvMode::Sharp))?.h_eff(&w)?;
    println!(
        "|H_eff|_2 = {:.4e}, Lorentzian vs sharp: {:.3e}",
        h.norm_l2(),
        h.dist_l2(&sharp)
    );
    Ok(())
}
