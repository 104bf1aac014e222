//! Time integration from a spin-polarized bump with both schemes.

use hbk::cli::config::{preset, Preset};
use hbk::collision::{CollisionOperator, CollisionParams};
use hbk::diagnostics::drift;
use hbk::evolution::{evolve, IntegratorConfig, Scheme};
use hbk::lattice::{Dispersion, TorusGrid};

fn main() -> hbk::error::Result<()> {
    let grid = TorusGrid::new(1, 32)?;
    let band = Dispersion::nearest_neighbor(0.0).sample(&grid)?;
    let op = CollisionOperator::new(band, CollisionParams::new(0.25))?;
    let w0 = preset(Preset::PolarizedBump, grid, 0);
    println!("dt heuristic: {:.4}", IntegratorConfig::dt_max(&op));

    for scheme in [Scheme::Rk4, Scheme::ExpDuhamel] {
        let cfg = IntegratorConfig {
            record_every: 25,
            ..IntegratorConfig::new(scheme, 0.01, 1.0)
        };
        let traj = evolve(&op, &w0, &cfg)?;
        let d = drift(&traj)?;
        println!("{scheme:?}: status {:?}", traj.status);
        for i in 0..traj.len() {
            println!(
                "  t = {:.2}  energy {:.8}  fermi residual {:.1e}",
                traj.times[i], traj.energy[i], traj.fermi_residual[i]
            );
        }
        println!("  energy drift {:.3e}, spin drift {:.3e}", d.energy, d.spin);
    }
    Ok(())
}
