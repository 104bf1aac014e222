//! Bessel envelope and the l3 decay of the free propagator.

use hbk::dispersion_validation::{bessel_envelope_constant, bessel_f, pt_l3_decay};
use hbk::lattice::{Dispersion, TorusGrid};

fn main() -> hbk::error::Result<()> {
    for r in [0.0, 2.404_825_557_695_773, 10.0] {
        println!("J0({r:.4}) = {:.12}", bessel_f(r).re);
    }
    println!(
        "max |J0(r)| sqrt(1 + r) on [0, 200]: {:.4}",
        bessel_envelope_constant(200.0, 0.05)
    );

    for d in 1..=3 {
        let fit = pt_l3_decay(&Dispersion::nearest_neighbor(0.0), &TorusGrid::new(d, 512)?, 40.0, 64)?;
        println!(
            "d = {d}: fitted exponent {:.4} (bound 3d/7 = {:.4})",
            fit.fitted_exponent,
            3.0 * d as f64 / 7.0
        );
    }
    Ok(())
}
