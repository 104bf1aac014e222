//! 2×2 spin algebra: J-map, tilde, Φ truncation and unitary exponentials.

use hbk::spin::{matrix_inequality_residual, SpinMatrix};
use rand::SeedableRng;

fn main() -> hbk::error::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let m = SpinMatrix::random_hermitian(&mut rng, 2.0);
    let (lo, hi) = m.eigenvalues();
    println!("M eigenvalues: {lo:.4}, {hi:.4}");

    let phi = m.truncate()?;
    let (plo, phi_hi) = phi.eigenvalues();
    println!("Phi[M] eigenvalues: {plo:.4}, {phi_hi:.4}");
    println!("J[J[M]] - M = {:.2e}", m.j().j().max_abs_diff(&m));
    println!("tilde(M) = 1 - J[M]: trace {:.4}", m.tilde().trace().re);

    let u = m.unitary_exp(0.3)?;
    println!(
        "|U U* - I| = {:.2e}",
        (u * u.adjoint()).max_abs_diff(&SpinMatrix::identity())
    );

    let (a, b, c) = (
        SpinMatrix::random_psd(&mut rng, 1.0),
        SpinMatrix::random_psd(&mut rng, 1.0),
        SpinMatrix::random_psd(&mut rng, 1.0),
    );
    println!(
        "min eig of A J[BC] + C J[BA]: {:.4}",
        matrix_inequality_residual(&a, &b, &c)?
    );
    Ok(())
}
