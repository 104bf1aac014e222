//! Nested-box integrals of |F(s)|^d over R^4 (coarse settings; takes a minute).

use hbk::dispersion_validation::{f_estimate, g_integrability_estimates, BoxResolution};
use hbk::lattice::SignVector;

fn main() -> hbk::error::Result<()> {
    let s = [0.7, -0.4, 1.1, 0.3];
    println!("F({s:?}) = {:.6}", f_estimate(s, SignVector::COLLISION, 16)?);
    let reports = g_integrability_estimates(SignVector::COLLISION, &[3, 1], &[2.0, 4.0], BoxResolution::default())?;
    for r in reports {
        println!(
            "d = {}: {:?} partial integrals {}",
            r.metadata["d"], r.verdict, r.metadata["partial_integrals"]
        );
    }
    Ok(())
}
