//! Residual reports for conservation, symmetries, ε-convergence and the
//! reindexing identities of the collision measure.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::collision::{check_epsilon, lorentz, CollisionOperator, CollisionParams, PvMode};
use crate::error::{HbkError, Result};
use crate::evolution::TrajectoryRecord;
use crate::field::{pairwise_sum_c64, WignerField};
use crate::lattice::{Band, Dispersion, SignVector, TorusGrid};
use crate::spin::TOL_HERM;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub param: f64,
    pub residual: f64,
}

/// A named list of `(parameter, residual)` pairs with a verdict.
///
/// Reports built with [`DiagnosticsReport::threshold`] pass iff every
/// residual is at most the tolerance. Reports whose contract is a shape
/// (monotone decay, geometric increments) record the rule under
/// `metadata.criterion`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub name: String,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub series: Vec<SeriesPoint>,
    pub metadata: BTreeMap<String, Value>,
}

impl DiagnosticsReport {
    pub fn threshold(name: &str, tolerance: f64, series: Vec<(f64, f64)>) -> Self {
        let ok = series.iter().all(|&(_, r)| r <= tolerance);
        Self::with_verdict(name, tolerance, series, ok)
    }

    pub fn with_verdict(name: &str, tolerance: f64, series: Vec<(f64, f64)>, ok: bool) -> Self {
        Self {
            name: name.to_string(),
            tolerance,
            verdict: Verdict::from_bool(ok),
            series: series
                .into_iter()
                .map(|(param, residual)| SeriesPoint { param, residual })
                .collect(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn grid_meta(self, grid: &TorusGrid) -> Self {
        self.meta("grid", serde_json::json!({ "d": grid.dim(), "n": grid.n() }))
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }

    pub fn max_residual(&self) -> f64 {
        self.series.iter().map(|p| p.residual).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Energy and spin drift of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drift {
    /// `max_t |E(t) − E(0)| / max(1, |E(0)|)`.
    pub energy: f64,
    /// `max_t ‖S(t) − S(0)‖`.
    pub spin: f64,
}

pub fn drift(traj: &TrajectoryRecord) -> Result<Drift> {
    let (&e0, &s0) = traj
        .energy
        .first()
        .zip(traj.spin.first())
        .ok_or(HbkError::EmptyInput("trajectory"))?;
    let scale = e0.abs().max(1.0);
    Ok(Drift {
        energy: traj.energy.iter().map(|e| (e - e0).abs() / scale).fold(0.0, f64::max),
        spin: traj.spin.iter().map(|s| (*s - s0).norm()).fold(0.0, f64::max),
    })
}

/// Per-time drift `max(energy, spin)`; pass iff it stays within `tolerance`.
pub fn conservation_report(traj: &TrajectoryRecord, tolerance: f64) -> Result<DiagnosticsReport> {
    let totals = drift(traj)?;
    let e0 = traj.energy[0];
    let s0 = traj.spin[0];
    let scale = e0.abs().max(1.0);
    let series = traj
        .times
        .iter()
        .zip(traj.energy.iter().zip(&traj.spin))
        .map(|(&t, (e, s))| (t, ((e - e0).abs() / scale).max((*s - s0).norm())))
        .collect();
    Ok(DiagnosticsReport::threshold("conservation", tolerance, series)
        .meta("energy_drift", totals.energy)
        .meta("spin_drift", totals.spin)
        .meta("steps", traj.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyOperator {
    HEff,
    CDiss,
}

/// Increments `‖Op^{ε_i}[W] − Op^{ε_{i+1}}[W]‖₂` along a paired `(N, ε)`
/// schedule.
///
/// `w` lives on the finest grid of the schedule and is restricted to each
/// coarser grid; consecutive outputs are compared on the coarser of the two
/// grids. The verdict requires every increment to be at most 1.1× the
/// previous one. With `compare_sharp` and `op = HEff`, the sharp cutoff is
/// also evaluated at the last schedule entry and must lie within twice the
/// last increment.
pub fn epsilon_study(
    w: &WignerField,
    dispersion: &Dispersion,
    schedule: &[(usize, f64)],
    op: StudyOperator,
    base: &CollisionParams,
    compare_sharp: bool,
) -> Result<DiagnosticsReport> {
    if schedule.len() < 2 {
        return Err(HbkError::BadSchedule("need at least two (N, epsilon) pairs".into()));
    }
    let d = w.grid().dim();
    let mut outputs = Vec::with_capacity(schedule.len());
    let mut last_op = None;
    for (i, &(n, eps)) in schedule.iter().enumerate() {
        check_epsilon(eps)?;
        if i > 0 {
            let (pn, pe) = schedule[i - 1];
            if !(eps < pe) || n < pn {
                return Err(HbkError::BadSchedule(
                    "epsilon must decrease and N must not decrease along the schedule".into(),
                ));
            }
        }
        let grid = TorusGrid::new(d, n)?;
        let band = dispersion.sample(&grid)?;
        let floor = crate::collision::eps_floor(&band, base.kappa);
        if eps < floor {
            return Err(HbkError::BadSchedule(format!(
                "epsilon {eps} below the floor {floor:.4} at N = {n}; refine the grid"
            )));
        }
        let wi = w.subsample(&grid)?;
        let operator = CollisionOperator::new(band, CollisionParams { epsilon: eps, ..*base })?;
        let out = match op {
            StudyOperator::HEff => operator.h_eff(&wi)?,
            StudyOperator::CDiss => operator.collision_diss(&wi)?,
        };
        log::debug!("epsilon study: N = {n}, epsilon = {eps} done");
        outputs.push(out);
        last_op = Some((operator, wi));
    }

    let mut series = Vec::with_capacity(schedule.len() - 1);
    for i in 0..schedule.len() - 1 {
        let coarse = *outputs[i].grid();
        let next = outputs[i + 1].subsample(&coarse)?;
        let param = schedule[i].1.max(schedule[i + 1].1);
        series.push((param, outputs[i].dist_l2(&next)));
    }
    let mut ok = series.windows(2).all(|p| p[1].1 <= 1.1 * p[0].1);
    let mut report_meta = Vec::new();
    if compare_sharp && op == StudyOperator::HEff {
        let (operator, wi) = last_op.expect("schedule is non-empty");
        let params = operator.params().with_pv_mode(PvMode::Sharp);
        let sharp_op = CollisionOperator::new(operator.band().clone(), params)?;
        let sharp = sharp_op.h_eff(&wi)?;
        let cross = sharp.dist_l2(outputs.last().expect("non-empty"));
        let last = series.last().expect("non-empty").1;
        ok &= cross < 2.0 * last;
        report_meta.push(("cross_mode_difference", Value::from(cross)));
    }
    let schedule_json: Vec<Value> = schedule
        .iter()
        .map(|&(n, e)| serde_json::json!({ "n": n, "epsilon": e }))
        .collect();
    let mut report = DiagnosticsReport::with_verdict(
        match op {
            StudyOperator::HEff => "epsilon-study/h-eff",
            StudyOperator::CDiss => "epsilon-study/c-diss",
        },
        0.1,
        series,
        ok,
    )
    .meta("criterion", "increments non-increasing within 10% slack")
    .meta("schedule", schedule_json)
    .meta("backend", serde_json::to_value(base.backend).expect("serializes"));
    for (k, v) in report_meta {
        report = report.meta(k, v);
    }
    Ok(report)
}

/// `‖C[W̃] + C[W]‖_∞` (param 0) and `‖H_eff[W̃] − H_eff[W]‖_∞` (param 1).
pub fn symmetry_residual(op: &CollisionOperator, w: &WignerField, tolerance: f64) -> Result<DiagnosticsReport> {
    let wt = w.tilde();
    let c = op.collision_full(w)?;
    let ct = op.collision_full(&wt)?;
    let h = op.h_eff(w)?;
    let ht = op.h_eff(&wt)?;
    let c_res = c.axpy(1.0, &ct).norm_inf();
    let h_res = h.dist_inf(&ht);
    Ok(
        DiagnosticsReport::threshold("tilde-symmetry", tolerance, vec![(0.0, c_res), (1.0, h_res)])
            .meta("labels", vec!["collision", "h_eff"])
            .meta("epsilon", op.epsilon())
            .grid_meta(op.grid()),
    )
}

/// A complex function sampled on `(T^d)^4`, indexed `k₁ + L(k₂ + L(k₃ + L k₄))`
/// with `L = N^d`.
#[derive(Debug, Clone)]
pub struct QuadField {
    grid: TorusGrid,
    data: Vec<Complex64>,
}

impl QuadField {
    pub fn new(grid: TorusGrid, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.len().pow(4) {
            return Err(HbkError::GridMismatch(format!(
                "{} samples for a four-fold grid of {} points",
                data.len(),
                grid.len().pow(4)
            )));
        }
        Ok(Self { grid, data })
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(usize, usize, usize, usize) -> Complex64) -> Self {
        let l = grid.len();
        let mut data = Vec::with_capacity(l.pow(4));
        for k4 in 0..l {
            for k3 in 0..l {
                for k2 in 0..l {
                    for k1 in 0..l {
                        data.push(f(k1, k2, k3, k4));
                    }
                }
            }
        }
        Self { grid, data }
    }

    /// `a(k₁) b(k₂) c(k₃) e(k₄)`.
    pub fn separable(
        grid: TorusGrid,
        a: &[Complex64],
        b: &[Complex64],
        c: &[Complex64],
        e: &[Complex64],
    ) -> Result<Self> {
        for v in [a, b, c, e] {
            if v.len() != grid.len() {
                return Err(HbkError::GridMismatch("factor length differs from grid".into()));
            }
        }
        Ok(Self::from_fn(grid, |k1, k2, k3, k4| a[k1] * b[k2] * c[k3] * e[k4]))
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn get(&self, k1: usize, k2: usize, k3: usize, k4: usize) -> Complex64 {
        let l = self.grid.len();
        self.data[k1 + l * (k2 + l * (k3 + l * k4))]
    }
}

/// The four iterated sums `N^{−d} Σ_k ∫ν_{k,α,σ⁽ⁱ⁾}(dk′) G(…)` with the
/// argument placements of the measure-swapping identity.
pub fn fubini_swap_sums(
    band: &Band,
    g: &QuadField,
    sigma: SignVector,
    alpha: f64,
    epsilon: f64,
) -> Result<[Complex64; 4]> {
    check_epsilon(epsilon)?;
    if g.grid() != band.grid() {
        return Err(HbkError::GridMismatch("test function and band grids differ".into()));
    }
    let grid = band.grid();
    let l = grid.len();
    let sigmas = [sigma, sigma.swap_second(), sigma.swap_third(), sigma.swap_fourth()];
    let place = |which: usize, k: usize, a: usize, b: usize, c: usize| -> Complex64 {
        match which {
            0 => g.get(k, a, b, c),
            1 => g.get(a, k, b, c),
            2 => g.get(b, grid.neg(a), k, grid.neg(c)),
            _ => g.get(b, grid.neg(a), grid.neg(c), k),
        }
    };
    let norm = grid.weight().powi(3) / PI;
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for (which, &s) in sigmas.iter().enumerate() {
        let rows: Vec<Complex64> = (0..l)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for a in 0..l {
                    for b in 0..l {
                        let c = grid.fourth(k, a, b);
                        let weight = lorentz(band.omega_tilde([k, a, b], s) - alpha, epsilon);
                        acc += place(which, k, a, b, c) * weight;
                    }
                }
                acc
            })
            .collect();
        out[which] = pairwise_sum_c64(&rows) * norm;
    }
    Ok(out)
}

/// Maximal pairwise deviation between the four iterated sums.
pub fn fubini_swap_residual(
    band: &Band,
    g: &QuadField,
    sigma: SignVector,
    alpha: f64,
    epsilon: f64,
    tolerance: f64,
) -> Result<DiagnosticsReport> {
    let sums = fubini_swap_sums(band, g, sigma, alpha, epsilon)?;
    let mut dev = 0.0f64;
    for i in 0..4 {
        for j in i + 1..4 {
            dev = dev.max((sums[i] - sums[j]).norm());
        }
    }
    let values: Vec<Value> = sums.iter().map(|z| serde_json::json!([z.re, z.im])).collect();
    Ok(
        DiagnosticsReport::threshold("fubini-swap", tolerance, vec![(alpha, dev)])
            .meta("sums", values)
            .meta("sigma", sigma.entries().to_vec())
            .meta("epsilon", epsilon)
            .grid_meta(band.grid()),
    )
}

/// `max_k max(−λ_min(W(k)), λ_max(W(k)) − 1, 0)`.
pub fn fermi_residual(w: &WignerField) -> Result<f64> {
    let herm = w.herm_residual();
    if herm > TOL_HERM {
        return Err(HbkError::NotHermitian {
            residual: herm,
            tol: TOL_HERM,
        });
    }
    Ok(w.fermi_residual())
}
