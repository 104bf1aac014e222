use crate::error::{HbkError, Result};
use crate::field::{pairwise_sum, WignerField};

/// Local torus average `A_δ[W](k) = Z_δ^{−1} Σ_{|k′|≤δ} W(k + k′) N^{−d}`.
pub fn mollify(w: &WignerField, delta: f64) -> Result<WignerField> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(HbkError::BadRadius(delta));
    }
    let grid = *w.grid();
    // small slack so points exactly on the sphere are kept
    let offsets: Vec<usize> = (0..grid.len())
        .filter(|&j| grid.torus_norm(j) <= delta * (1.0 + 1e-12))
        .collect();
    if offsets.len() == 1 {
        log::warn!(
            "mollifier radius {delta} is below the grid spacing 1/{}; returning the field unchanged",
            grid.n()
        );
        return Ok(w.clone());
    }
    let z = offsets.len() as f64;
    Ok(WignerField::from_fn(grid, |k| {
        let terms: Vec<_> = offsets.iter().map(|&o| w[grid.add(k, o)]).collect();
        pairwise_sum(&terms) * (1.0 / z)
    }))
}
