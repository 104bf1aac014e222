//! Experiment drivers behind the subcommands.

use std::path::Path;

use serde_json::{json, Value};

use crate::collision::sigma_coll_alpha_integral;
use crate::diagnostics::{conservation_report, epsilon_study, DiagnosticsReport};
use crate::dispersion_validation::{bessel_envelope_constant, g_integrability_estimates, pt_l3_decay};
use crate::error::Result;
use crate::evolution::{evolve, IntegratorConfig, RunStatus};
use crate::lattice::{Dispersion, TorusGrid};

use super::config::RunConfig;
use super::io::{write_csv, write_json, write_snapshot};

/// Non-error end states of a command.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Ok,
    /// The run stopped on a violated runtime constraint; partial output exists.
    ConstraintViolated(String),
}

pub(crate) fn provenance(cfg: &RunConfig) -> (String, Value) {
    let text = cfg.to_toml();
    let value = serde_json::to_value(cfg).expect("config serializes");
    (text, value)
}

fn report_value(r: &DiagnosticsReport) -> Value {
    serde_json::to_value(r).expect("report serializes")
}

pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let (toml_text, cfg_json) = provenance(cfg);
    let op = cfg.operator()?;
    let w0 = cfg.initial_field(*op.grid())?;
    let traj = evolve(&op, &w0, &cfg.integrator)?;

    let header = [
        "t",
        "energy",
        "s00_re",
        "s00_im",
        "s01_re",
        "s01_im",
        "s10_re",
        "s10_im",
        "s11_re",
        "s11_im",
        "fermi_residual",
        "herm_residual",
    ];
    let rows = (0..traj.len()).map(|i| {
        let s = traj.spin[i].m;
        let mut row = vec![traj.times[i], traj.energy[i]];
        for z in [s[0][0], s[0][1], s[1][0], s[1][1]] {
            row.extend([z.re, z.im]);
        }
        row.extend([traj.fermi_residual[i], traj.herm_residual[i]]);
        row
    });
    write_csv(&out.join("trajectory.csv"), &toml_text, &header, rows)?;

    let snaps = out.join("snapshots");
    std::fs::create_dir_all(&snaps)?;
    for (i, (t, w)) in traj.times.iter().zip(&traj.fields).enumerate() {
        let trailer = format!("# t = {t:.16e}\n{toml_text}");
        write_snapshot(&snaps.join(format!("w_{i:05}.hbwf")), w, Some(&trailer))?;
    }

    let conservation = conservation_report(&traj, 1e-8)?;
    let max_fermi = traj.fermi_residual.iter().cloned().fold(0.0, f64::max);
    let report = json!({
        "config": cfg_json,
        "status": traj.status,
        "records": traj.len(),
        "dt_max_heuristic": IntegratorConfig::dt_max(&op),
        "max_fermi_residual": max_fermi,
        "final_energy": traj.energy.last(),
        "conservation": report_value(&conservation),
    });
    write_json(&out.join("report.json"), &report)?;

    match traj.status {
        RunStatus::Completed => {
            log::info!("simulate: {} records, max fermi residual {max_fermi:.3e}", traj.len());
            Ok(Outcome::Ok)
        }
        RunStatus::ConstraintViolated { t, fermi_residual } => Ok(Outcome::ConstraintViolated(format!(
            "fermi residual {fermi_residual:.3e} at t = {t}; reduce integrator.dt"
        ))),
    }
}

pub fn run_epsilon_study(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let (toml_text, cfg_json) = provenance(cfg);
    let es = &cfg.epsilon_study;
    let n_max = es.schedule.iter().map(|p| p.0).max().unwrap_or(cfg.grid.n);
    let fine = TorusGrid::new(cfg.grid.d, n_max)?;
    let w = cfg.initial_field(fine)?;
    let report = epsilon_study(
        &w,
        &cfg.dispersion()?,
        &es.schedule,
        es.operator,
        &cfg.collision,
        es.compare_sharp,
    )?;
    log::info!("epsilon study verdict: {:?}", report.verdict);

    let rows = es
        .schedule
        .windows(2)
        .zip(&report.series)
        .map(|(pair, p)| vec![pair[0].0 as f64, pair[0].1, pair[1].0 as f64, pair[1].1, p.residual]);
    write_csv(
        &out.join("epsilon_study.csv"),
        &toml_text,
        &["n_coarse", "epsilon_coarse", "n_fine", "epsilon_fine", "increment_l2"],
        rows,
    )?;
    write_json(
        &out.join("epsilon_study.json"),
        &json!({ "config": cfg_json, "report": report_value(&report) }),
    )?;
    Ok(Outcome::Ok)
}

pub fn validate_dispersion(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let (toml_text, cfg_json) = provenance(cfg);
    let dv = &cfg.dispersion_validation;
    let d = cfg.grid.d;
    let mut reports = Vec::new();

    let c1 = bessel_envelope_constant(dv.bessel_r_max, dv.bessel_step);
    reports.push(
        DiagnosticsReport::threshold("bessel-envelope", 1.3, vec![(dv.bessel_r_max, c1)])
            .meta("criterion", "max |J0(r)| sqrt(1 + r) <= 1.3")
            .meta("step", dv.bessel_step),
    );

    let dispersion = cfg.dispersion()?;
    // product-form bands use a long 1-D axis; tabulated bands use the configured grid
    let grid = match dispersion {
        Dispersion::NearestNeighbor { .. } => TorusGrid::new(d, dv.axis_n)?,
        Dispersion::Tabulated { .. } => cfg.grid()?,
    };
    let fit = pt_l3_decay(&dispersion, &grid, dv.t_max, dv.samples)?;
    let bound = 3.0 * d as f64 / 7.0;
    reports.push(
        DiagnosticsReport::with_verdict(
            "pt-l3-decay",
            bound,
            vec![(dv.t_max, fit.fitted_exponent)],
            fit.fitted_exponent >= bound,
        )
        .meta("criterion", "fitted exponent >= 3d/7")
        .meta("fitted_exponent", fit.fitted_exponent)
        .meta("fitted_constant", fit.fitted_constant)
        .grid_meta(&grid),
    );
    write_csv(
        &out.join("pt_decay.csv"),
        &toml_text,
        &["t", "pt_l3_cubed"],
        fit.abscissae.iter().zip(&fit.values).map(|(&t, &v)| vec![t, v]),
    )?;

    if dv.integrability {
        let dims = dv.dims.clone().unwrap_or_else(|| vec![d as u32]);
        reports.extend(g_integrability_estimates(
            dv.sigma,
            &dims,
            &dv.boxes,
            cfg.box_resolution(),
        )?);
    }
    for r in &reports {
        log::info!("{}: {:?}", r.name, r.verdict);
    }
    write_json(
        &out.join("validate_dispersion.json"),
        &json!({
            "config": cfg_json,
            "reports": reports.iter().map(report_value).collect::<Vec<_>>(),
        }),
    )?;
    Ok(Outcome::Ok)
}

pub fn sigma_coll(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let (toml_text, cfg_json) = provenance(cfg);
    let sc = &cfg.sigma_coll;
    let band = cfg.band()?;
    let eps = cfg.collision.epsilon;
    let m = band.omega_tilde_bound(sc.sigma) + sc.margin * eps;
    let d_alpha = sc.d_alpha.unwrap_or(eps / 4.0);
    let (alphas, profile, integral) = sigma_coll_alpha_integral(&band, eps, sc.k1, sc.sigma, m, d_alpha)?;

    let h = alphas.get(1).map_or(0.0, |a| a - alphas[0]);
    let last = alphas.len() - 1;
    let rows = alphas.iter().zip(&profile).enumerate().map(|(i, (&a, &p))| {
        let weight = if i == 0 || i == last { 0.5 * h } else { h };
        vec![a, p, weight * p]
    });
    write_csv(
        &out.join("sigma_coll.csv"),
        &toml_text,
        &["alpha", "sigma_coll", "integral"],
        rows,
    )?;

    let report = DiagnosticsReport::threshold("sigma-coll-normalization", 1e-3, vec![(m, (integral - 1.0).abs())])
        .meta("criterion", "|integral - 1| <= 1e-3")
        .meta("integral", integral)
        .meta("alpha_range", m)
        .meta("d_alpha", h)
        .meta("k1", sc.k1)
        .meta("epsilon", eps)
        .grid_meta(band.grid());
    log::info!("sigma_coll integral {integral:.9}");
    write_json(
        &out.join("sigma_coll.json"),
        &json!({ "config": cfg_json, "report": report_value(&report) }),
    )?;
    Ok(Outcome::Ok)
}
