//! Time integration of `∂_t W = C_diss[W] − i[H_eff^ε[W], W]`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::collision::{CollisionOperator, Parts};
use crate::error::{HbkError, Result};
use crate::field::WignerField;
use crate::spin::{SpinMatrix, TOL_HERM};

/// Fermi residual beyond which a state is no longer a fermionic occupation.
pub const FERMI_ABORT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    Rk4,
    ExpDuhamel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    /// Evaluate the operator at `Φ[W]` (truncated dynamics).
    pub truncation: bool,
    pub record_every: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Rk4,
            dt: 1e-2,
            t_end: 1.0,
            truncation: false,
            record_every: 1,
        }
    }
}

impl IntegratorConfig {
    pub fn new(scheme: Scheme, dt: f64, t_end: f64) -> Self {
        Self {
            scheme,
            dt,
            t_end,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(HbkError::config("integrator.dt", "must be positive"));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(HbkError::config("integrator.t_end", "must be non-negative"));
        }
        if self.record_every == 0 {
            return Err(HbkError::config("integrator.record_every", "must be at least 1"));
        }
        Ok(())
    }

    /// Step-size heuristic `0.1/(1 + π sup σ_coll)`.
    pub fn dt_max(op: &CollisionOperator) -> f64 {
        0.1 / (1.0 + std::f64::consts::PI * op.sigma_coll_max())
    }
}

fn rhs(op: &CollisionOperator, w: &WignerField, truncation: bool) -> Result<WignerField> {
    if truncation {
        op.collision_truncated(w)
    } else {
        op.collision_full(w)
    }
}

fn finish_step(mut w: WignerField, t: f64) -> Result<(WignerField, f64)> {
    let herm = w.symmetrize();
    let residual = w.fermi_residual();
    if residual > FERMI_ABORT {
        return Err(HbkError::DtTooLarge { residual, t });
    }
    Ok((w, herm))
}

fn rk4_raw(op: &CollisionOperator, w: &WignerField, dt: f64, truncation: bool) -> Result<WignerField> {
    let k1 = rhs(op, w, truncation)?;
    let k2 = rhs(op, &w.axpy(0.5 * dt, &k1), truncation)?;
    let k3 = rhs(op, &w.axpy(0.5 * dt, &k2), truncation)?;
    let k4 = rhs(op, &w.axpy(dt, &k3), truncation)?;
    let mut out = w.clone();
    for (k, o) in out.as_mut_slice().iter_mut().enumerate() {
        let incr = (k1[k] + (k2[k] + k3[k]) * 2.0 + k4[k]) * (dt / 6.0);
        *o += incr;
    }
    Ok(out)
}

fn exp_duhamel_raw(op: &CollisionOperator, w: &WignerField, dt: f64, truncation: bool) -> Result<WignerField> {
    let arg = if truncation {
        w.map(|m| m.truncate_unchecked())
    } else {
        w.clone()
    };
    let comps = op.components(&arg, Parts::ALL)?;
    let h = comps.h.as_ref().expect("H_eff requested");
    let mut out = WignerField::from_fn(*w.grid(), |k| {
        let (a, b) = (comps.a[k], comps.b[k]);
        let gain = (a + a.adjoint()).hermitian_part();
        let loss = a.adjoint() + b.adjoint();
        let gen = (loss + h[k] * Complex64::new(0.0, 1.0)) * (-dt);
        let e = gen.exp();
        e * w[k] * e.adjoint() + gain * dt
    });
    if truncation {
        out.symmetrize();
        out = out.map(|m| m.truncate_unchecked());
    }
    Ok(out)
}

/// One classical fourth-order Runge–Kutta step; the output is symmetrized.
pub fn rk4_step(op: &CollisionOperator, w: &WignerField, cfg: &IntegratorConfig) -> Result<WignerField> {
    cfg.validate()?;
    Ok(finish_step(rk4_raw(op, w, cfg.dt, cfg.truncation)?, cfg.dt)?.0)
}

/// One step of `W ← E W E* + dt·𝒢[W]` with `E = exp(−dt(𝒟[W] + iH_eff[W]))`.
pub fn exp_duhamel_step(op: &CollisionOperator, w: &WignerField, cfg: &IntegratorConfig) -> Result<WignerField> {
    cfg.validate()?;
    Ok(finish_step(exp_duhamel_raw(op, w, cfg.dt, cfg.truncation)?, cfg.dt)?.0)
}

fn step(op: &CollisionOperator, w: &WignerField, dt: f64, cfg: &IntegratorConfig) -> Result<WignerField> {
    match cfg.scheme {
        Scheme::Rk4 => rk4_raw(op, w, dt, cfg.truncation),
        Scheme::ExpDuhamel => exp_duhamel_raw(op, w, dt, cfg.truncation),
    }
}

/// Per-point propagator `U_{t,0} = Π_n exp(−i·dt·h_n)` with the latest factor on
/// the left, where `h_n` is the generator at the midpoint of step `n`. This
/// solves `∂_s U_{t,s} = i U_{t,s} h_s`, `U_{t,t} = I`.
pub fn unitary_propagator(h_series: &[WignerField], dt: f64) -> Result<WignerField> {
    let first = h_series.first().ok_or(HbkError::EmptyInput("h_series"))?;
    let grid = *first.grid();
    let mut u = WignerField::constant(grid, SpinMatrix::identity());
    for h in h_series {
        first.check_same_grid(h)?;
        for k in 0..grid.len() {
            let factor = h[k].unitary_exp(-dt)?;
            u[k] = factor * u[k];
        }
    }
    Ok(u)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RunStatus {
    Completed,
    ConstraintViolated { t: f64, fermi_residual: f64 },
}

/// Recorded trajectory and its diagnostics.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub fields: Vec<WignerField>,
    /// `N^{−d} Σ ω tr W`.
    pub energy: Vec<f64>,
    /// `N^{−d} Σ W`.
    pub spin: Vec<SpinMatrix>,
    pub fermi_residual: Vec<f64>,
    /// Hermiticity residual removed by the symmetrization after each step.
    pub herm_residual: Vec<f64>,
    pub status: RunStatus,
}

impl TrajectoryRecord {
    fn new() -> Self {
        Self {
            times: Vec::new(),
            fields: Vec::new(),
            energy: Vec::new(),
            spin: Vec::new(),
            fermi_residual: Vec::new(),
            herm_residual: Vec::new(),
            status: RunStatus::Completed,
        }
    }

    fn push(&mut self, op: &CollisionOperator, t: f64, w: &WignerField, herm: f64) {
        self.times.push(t);
        self.energy.push(w.energy(op.band()));
        self.spin.push(w.mean());
        self.fermi_residual.push(w.fermi_residual());
        self.herm_residual.push(herm);
        self.fields.push(w.clone());
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&WignerField> {
        self.fields.last()
    }

    pub fn completed(&self) -> bool {
        self.status == RunStatus::Completed
    }
}

/// Integrates from `0` to `t_end`, recording every `record_every` steps and
/// at the final time. Stops early once the Fermi residual exceeds
/// [`FERMI_ABORT`].
pub fn evolve(op: &CollisionOperator, w0: &WignerField, cfg: &IntegratorConfig) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    if w0.grid() != op.grid() {
        return Err(HbkError::GridMismatch("initial field and operator grids differ".into()));
    }
    let herm0 = w0.herm_residual();
    if herm0 > TOL_HERM {
        return Err(HbkError::NotHermitian {
            residual: herm0,
            tol: TOL_HERM,
        });
    }
    if w0.fermi_residual() > crate::spin::TOL_FERMI {
        log::warn!(
            "initial data violates the Fermi constraint by {:.3e}",
            w0.fermi_residual()
        );
    }
    let dt_max = IntegratorConfig::dt_max(op);
    if cfg.dt > dt_max {
        log::info!("dt = {} exceeds the explicit-step heuristic {dt_max:.4}", cfg.dt);
    }

    let steps = (cfg.t_end / cfg.dt - 1e-9).ceil().max(0.0) as usize;
    let mut rec = TrajectoryRecord::new();
    let mut w = w0.clone();
    rec.push(op, 0.0, &w, herm0);
    let mut t = 0.0;
    for n in 1..=steps {
        let t_next = if n == steps { cfg.t_end } else { n as f64 * cfg.dt };
        let mut next = step(op, &w, t_next - t, cfg)?;
        let herm = next.symmetrize();
        t = t_next;
        w = next;
        let residual = w.fermi_residual();
        if residual > FERMI_ABORT {
            rec.push(op, t, &w, herm);
            rec.status = RunStatus::ConstraintViolated {
                t,
                fermi_residual: residual,
            };
            log::warn!("fermi residual {residual:.3e} at t = {t}; stopping");
            return Ok(rec);
        }
        if n % cfg.record_every == 0 || n == steps {
            rec.push(op, t, &w, herm);
        }
    }
    Ok(rec)
}

/// Divergence of two trajectories relative to their initial distance.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub times: Vec<f64>,
    /// `‖W_t − W′_t‖₂`.
    pub distance: Vec<f64>,
    /// `‖W_t − W′_t‖₂ / ‖W₀ − W′₀‖₂`, zero when the inputs coincide.
    pub ratio: Vec<f64>,
    /// Smallest `C` with `ratio(t) ≤ e^{Ct}` on the recorded times.
    pub fitted_c: f64,
}

pub fn stability_vs_initial_data(
    op: &CollisionOperator,
    w0: &WignerField,
    w0p: &WignerField,
    cfg: &IntegratorConfig,
) -> Result<StabilityReport> {
    w0.check_same_grid(w0p)?;
    let a = evolve(op, w0, cfg)?;
    let b = evolve(op, w0p, cfg)?;
    let n = a.len().min(b.len());
    let d0 = w0.dist_l2(w0p);
    let distance: Vec<f64> = (0..n).map(|i| a.fields[i].dist_l2(&b.fields[i])).collect();
    let ratio: Vec<f64> = distance.iter().map(|&d| if d0 > 0.0 { d / d0 } else { 0.0 }).collect();
    let fitted_c = a.times[..n]
        .iter()
        .zip(&ratio)
        .filter(|(t, r)| **t > 0.0 && **r > 0.0)
        .map(|(t, r)| r.ln() / t)
        .fold(0.0, f64::max);
    Ok(StabilityReport {
        times: a.times[..n].to_vec(),
        distance,
        ratio,
        fitted_c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::CollisionParams;
    use crate::lattice::{Dispersion, TorusGrid};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn op(n: usize, eps: f64) -> CollisionOperator {
        let grid = TorusGrid::new(1, n).unwrap();
        let band = Dispersion::nearest_neighbor(0.0).sample(&grid).unwrap();
        CollisionOperator::new(band, CollisionParams::new(eps)).unwrap()
    }

    #[test]
    fn constant_fields_do_not_move() {
        let op = op(8, 0.8);
        let w = WignerField::constant(*op.grid(), SpinMatrix::diag(0.3, 0.3));
        for scheme in [Scheme::Rk4, Scheme::ExpDuhamel] {
            let cfg = IntegratorConfig::new(scheme, 0.05, 1.0);
            let rec = evolve(&op, &w, &cfg).unwrap();
            assert!(rec.completed());
            let d = rec.last().unwrap().dist_l2(&w);
            // the splitting is first order, so stationarity holds only to O(dt)
            let tol = if scheme == Scheme::Rk4 { 1e-10 } else { 1e-2 };
            assert!(d < tol, "{scheme:?} {d}");
            assert!(rk4_step(&op, &w, &cfg).unwrap().dist_inf(&w) < 1e-14);
            let one = exp_duhamel_step(&op, &w, &cfg).unwrap();
            assert!(one.dist_inf(&w) < 0.05 * 0.05 * 4.0);
        }
    }

    #[test]
    fn unitary_propagator_examples() {
        let grid = TorusGrid::new(1, 4).unwrap();
        let zero = vec![WignerField::zeros(grid); 3];
        let u = unitary_propagator(&zero, 0.1).unwrap();
        assert!(u.iter().all(|m| m.max_abs_diff(&SpinMatrix::identity()) < 1e-15));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h0 = SpinMatrix::random_hermitian(&mut rng, 1.0);
        let series = vec![WignerField::constant(grid, h0); 20];
        let u = unitary_propagator(&series, 0.05).unwrap();
        let exact = h0.unitary_exp(-1.0).unwrap();
        assert!(u[0].max_abs_diff(&exact) < 1e-10);
        let series: Vec<_> = (0..30)
            .map(|_| WignerField::random_hermitian(grid, &mut rng, 2.0))
            .collect();
        let u = unitary_propagator(&series, 0.1).unwrap();
        for m in u.iter() {
            assert!((m.adjoint() * *m).max_abs_diff(&SpinMatrix::identity()) < 1e-12);
        }
        assert!(matches!(unitary_propagator(&[], 0.1), Err(HbkError::EmptyInput(_))));
    }

    #[test]
    fn exp_duhamel_keeps_psd() {
        let op = op(8, 0.8);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = WignerField::random_with_spectrum(*op.grid(), &mut rng, 0.0, 1.0);
        let cfg = IntegratorConfig::new(Scheme::ExpDuhamel, 0.05, 1.0);
        let rec = evolve(&op, &w, &cfg).unwrap();
        assert!(rec.fields.iter().all(|f| f.min_eigenvalue() >= -1e-12));
    }

    #[test]
    fn step_rejects_large_residual() {
        let op = op(8, 0.8);
        let w = WignerField::constant(*op.grid(), SpinMatrix::diag(1.5, 0.0));
        let cfg = IntegratorConfig::new(Scheme::Rk4, 0.01, 0.02);
        assert!(matches!(rk4_step(&op, &w, &cfg), Err(HbkError::DtTooLarge { .. })));
        let rec = evolve(&op, &w, &cfg).unwrap();
        assert!(!rec.completed());
    }

    #[test]
    fn identical_inputs_have_zero_divergence() {
        let op = op(8, 0.8);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w = WignerField::random_fermi(*op.grid(), &mut rng);
        let cfg = IntegratorConfig::new(Scheme::Rk4, 0.1, 0.5);
        let rep = stability_vs_initial_data(&op, &w, &w, &cfg).unwrap();
        assert!(rep.ratio.iter().all(|&r| r == 0.0));
        assert_eq!(rep.fitted_c, 0.0);
    }
}
