//! Mass of the collision measure as a function of the energy offset.

use hbk::collision::{sigma_coll_alpha_integral, sigma_coll_map};
use hbk::lattice::{Dispersion, SignVector, TorusGrid};

fn main() -> hbk::error::Result<()> {
    let grid = TorusGrid::new(1, 64)?;
    let band = Dispersion::nearest_neighbor(0.0).sample(&grid)?;
    let (eps, sigma) = (0.1, SignVector::COLLISION);
    for alpha in [-2.0, 0.0, 1.0, 5.0] {
        println!(
            "sigma_coll(0, {alpha:+}) = {:.5}",
            sigma_coll_map(&band, eps, 0, alpha, sigma)?
        );
    }
    let m = band.omega_tilde_bound(sigma) + 2000.0 * eps;
    let (_, _, integral) = sigma_coll_alpha_integral(&band, eps, 0, sigma, m, eps / 4.0)?;
    println!("integral over [-{m:.1}, {m:.1}]: {integral:.6}");
    Ok(())
}
