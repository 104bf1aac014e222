//! Convergence of H_eff as the regulator shrinks with the grid.

use hbk::cli::config::{preset, Preset};
use hbk::collision::CollisionParams;
use hbk::diagnostics::{epsilon_study, StudyOperator};
use hbk::lattice::{Dispersion, TorusGrid};

fn main() -> hbk::error::Result<()> {
    let schedule = [(32, 0.8), (64, 0.4), (128, 0.2)];
    let w = preset(Preset::SmoothCosine, TorusGrid::new(1, 128)?, 0);
    let dispersion = Dispersion::nearest_neighbor(0.0);
    for op in [StudyOperator::HEff, StudyOperator::CDiss] {
        let rep = epsilon_study(&w, &dispersion, &schedule, op, &CollisionParams::default(), true)?;
        println!("{}: {:?}", rep.name, rep.verdict);
        for p in &rep.series {
            println!("  epsilon {:.2}: increment {:.5e}", p.param, p.residual);
        }
        if let Some(x) = rep.metadata.get("cross_mode_difference") {
            println!("  sharp vs Lorentzian: {x}");
        }
    }
    Ok(())
}
