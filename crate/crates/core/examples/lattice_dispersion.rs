//! Torus grids, the nearest-neighbor band and the free propagator.

use hbk::lattice::{Dispersion, SignVector, TorusGrid};

fn main() -> hbk::error::Result<()> {
    let grid = TorusGrid::new(2, 16)?;
    let band = Dispersion::nearest_neighbor(0.0).sample(&grid)?;
    let (lo, hi) = band.range();
    println!("N = {}, d = {}, points = {}", grid.n(), grid.dim(), grid.len());
    println!(
        "omega range [{lo:.4}, {hi:.4}], Lipschitz bound {:.4}",
        band.lipschitz()
    );
    println!(
        "sup |Omega~| for (+,+,-,-): {:.4}",
        band.omega_tilde_bound(SignVector::COLLISION)
    );

    let k = grid.index(&[3, 5]);
    println!(
        "k = {:?}, k4(k, 1, 2) = {:?}",
        grid.point(k),
        grid.coords(grid.fourth(k, 1, 2))
    );

    for t in [0.0, 1.0, 4.0] {
        let p0 = band.free_propagator(t, &[0, 0])?;
        println!("p_t(0) at t = {t}: {:.5} {:+.5}i", p0.re, p0.im);
    }
    Ok(())
}
