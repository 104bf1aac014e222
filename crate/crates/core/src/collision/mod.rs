//! Regularized collision operators.
//!
//! For a field `W` and `k₄ = k₁ + k₂ − k₃` the operator sums over `(k₂, k₃)`
//! the two kernels
//!
//! ```text
//! X = W₃ J[W̃₂ W₄],    Y = W̃₃ J[W₂ W̃₄]
//! ```
//!
//! weighted by the Lorentzian `ε/(ω̲² + ε²)`. With `A = N^{−2d} Σ L·X` and
//! `B = N^{−2d} Σ L·Y` the dissipative part is
//! `C_diss = W̃A + A*W̃ − WB − B*W`, which is also `𝒢 − 𝒟W − W𝒟*` with gain
//! `𝒢 = A + A*` and loss `𝒟 = A* + B*`. The effective Hamiltonian is a
//! principal-value sum of the short integrand
//! `J[W₄−W₂]W₃ + W₃J[W₄−W₂] + J[W₂W̃₄ + W̃₄W₂]`.

mod direct;
mod measure;
mod mollify;
mod spectral;

pub use measure::{
    c0_trilinear, h_eff_via_bilinears, lorentz_bilinear, pv_bilinear, sigma_coll_alpha_integral, sigma_coll_map,
    sigma_coll_profile, sigma_coll_sup,
};
pub use mollify::mollify;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HbkError, Result};
use crate::field::WignerField;
use crate::lattice::{Band, TorusGrid};
use crate::spin::SpinMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    #[default]
    Direct,
    Spectral,
}

/// Kernel used for the principal-value sum in `H_eff`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PvMode {
    /// `x/(x² + ε²)`.
    #[default]
    Lorentzian,
    /// `1{|x| ≥ ε}/x`.
    Sharp,
}

/// s-quadrature settings of the spectral backend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralOptions {
    /// Required bound on the truncated tail `e^{−ε S_max}`.
    pub tail_tol: f64,
    /// Explicit truncation point; derived from `tail_tol` when absent.
    pub s_max: Option<f64>,
    /// Gauss–Legendre points per panel.
    pub panel_points: usize,
    /// Largest phase `s·|z|` swept across one panel.
    pub panel_phase: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            tail_tol: 1e-10,
            s_max: None,
            panel_points: 16,
            panel_phase: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollisionParams {
    pub epsilon: f64,
    pub backend: Backend,
    pub pv_mode: PvMode,
    /// Floor factor: the direct backend requires `ε ≥ κ·L_ω/N`.
    pub kappa: f64,
    pub spectral: SpectralOptions,
}

impl Default for CollisionParams {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            backend: Backend::Direct,
            pv_mode: PvMode::Lorentzian,
            kappa: 1.0,
            spectral: SpectralOptions::default(),
        }
    }
}

impl CollisionParams {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn with_pv_mode(mut self, mode: PvMode) -> Self {
        self.pv_mode = mode;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(HbkError::BadRegulator(epsilon))
    }
}

/// `ε/(x² + ε²)`.
pub fn lorentzian_delta(x: f64, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(lorentz(x, epsilon))
}

/// `x/(x² + ε²)`.
pub fn pv_kernel(x: f64, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(pv_lorentz(x, epsilon))
}

/// `1{|x| ≥ ε}/x`.
pub fn sharp_pv_kernel(x: f64, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(pv_sharp(x, epsilon))
}

#[inline(always)]
pub(crate) fn lorentz(x: f64, eps: f64) -> f64 {
    eps / (x * x + eps * eps)
}

#[inline(always)]
pub(crate) fn pv_lorentz(x: f64, eps: f64) -> f64 {
    x / (x * x + eps * eps)
}

#[inline(always)]
pub(crate) fn pv_sharp(x: f64, eps: f64) -> f64 {
    if x.abs() >= eps {
        1.0 / x
    } else {
        0.0
    }
}

impl PvMode {
    #[inline(always)]
    pub(crate) fn eval(self, x: f64, eps: f64) -> f64 {
        match self {
            PvMode::Lorentzian => pv_lorentz(x, eps),
            PvMode::Sharp => pv_sharp(x, eps),
        }
    }
}

/// Smallest admissible `ε` for the direct backend, `κ·L_ω/N`.
pub fn eps_floor(band: &Band, kappa: f64) -> f64 {
    kappa * band.lipschitz() / band.grid().n() as f64
}

/// The per-point sums from which every operator is assembled.
#[derive(Debug, Clone)]
pub struct Components {
    /// `N^{−2d} Σ L(ω̲)·W₃J[W̃₂W₄]`.
    pub a: Vec<SpinMatrix>,
    /// `N^{−2d} Σ L(ω̲)·W̃₃J[W₂W̃₄]`.
    pub b: Vec<SpinMatrix>,
    /// `H_eff` (already Hermitian-symmetrized), when requested.
    pub h: Option<Vec<SpinMatrix>>,
}

/// Which operator parts to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Parts {
    pub diss: bool,
    pub heff: bool,
}

impl Parts {
    pub const DISS: Parts = Parts {
        diss: true,
        heff: false,
    };
    pub const HEFF: Parts = Parts {
        diss: false,
        heff: true,
    };
    pub const ALL: Parts = Parts { diss: true, heff: true };
}

/// An operator value together with the Hermiticity residual removed by the
/// final symmetrization.
#[derive(Debug, Clone)]
pub struct OperatorOutput {
    pub field: WignerField,
    pub herm_residual: f64,
}

#[derive(Debug, Clone)]
pub struct CollisionOperator {
    band: Band,
    params: CollisionParams,
}

impl CollisionOperator {
    pub fn new(band: Band, params: CollisionParams) -> Result<Self> {
        check_epsilon(params.epsilon)?;
        let op = Self { band, params };
        if params.backend == Backend::Direct {
            op.check_floor()?;
        }
        if params.backend == Backend::Spectral {
            spectral::check_options(&params)?;
        }
        Ok(op)
    }

    pub fn band(&self) -> &Band {
        &self.band
    }

    pub fn grid(&self) -> &TorusGrid {
        self.band.grid()
    }

    pub fn params(&self) -> &CollisionParams {
        &self.params
    }

    pub fn epsilon(&self) -> f64 {
        self.params.epsilon
    }

    pub fn eps_floor(&self) -> f64 {
        eps_floor(&self.band, self.params.kappa)
    }

    pub fn check_floor(&self) -> Result<()> {
        let floor = self.eps_floor();
        if self.params.epsilon < floor {
            return Err(HbkError::BelowFloor {
                epsilon: self.params.epsilon,
                floor,
                kappa: self.params.kappa,
                n: self.grid().n(),
            });
        }
        Ok(())
    }

    fn check_field(&self, w: &WignerField) -> Result<()> {
        if w.grid() != self.grid() {
            return Err(HbkError::GridMismatch(format!(
                "field on {:?}, operator on {:?}",
                w.grid(),
                self.grid()
            )));
        }
        Ok(())
    }

    /// Evaluates `A`, `B` and `H_eff` with the configured backend.
    pub fn components(&self, w: &WignerField, parts: Parts) -> Result<Components> {
        match self.params.backend {
            Backend::Direct => self.components_direct(w, parts),
            Backend::Spectral => self.components_spectral(w, parts),
        }
    }

    pub fn components_direct(&self, w: &WignerField, parts: Parts) -> Result<Components> {
        self.check_field(w)?;
        Ok(direct::components(&self.band, &self.params, w.as_slice(), parts))
    }

    /// Spectral evaluation. `H_eff` is only available here in Lorentzian mode;
    /// the sharp kernel falls back to the direct sum.
    pub fn components_spectral(&self, w: &WignerField, parts: Parts) -> Result<Components> {
        self.check_field(w)?;
        spectral::check_options(&self.params)?;
        let sharp_h = parts.heff && self.params.pv_mode == PvMode::Sharp;
        let spec_parts = Parts {
            diss: parts.diss,
            heff: parts.heff && !sharp_h,
        };
        let mut comps = spectral::components(&self.band, &self.params, w.as_slice(), spec_parts);
        if sharp_h {
            comps.h = direct::components(&self.band, &self.params, w.as_slice(), Parts::HEFF).h;
        }
        Ok(comps)
    }

    /// Assembles operator values at the field `w` from components computed at
    /// a (possibly different) field.
    pub fn assemble(&self, comps: &Components, w: &WignerField, parts: Parts) -> OperatorOutput {
        let mut out = WignerField::from_fn(*w.grid(), |k| {
            let wk = w[k];
            let mut c = SpinMatrix::zero();
            if parts.diss {
                let (a, b) = (comps.a[k], comps.b[k]);
                let gain = a + a.adjoint();
                let loss = a.adjoint() + b.adjoint();
                c += gain - loss * wk - wk * loss.adjoint();
            }
            if parts.heff {
                let h = comps.h.as_ref().expect("H_eff not evaluated")[k];
                c += h.commutator(&wk) * Complex64::new(0.0, -1.0);
            }
            c
        });
        let herm_residual = out.symmetrize();
        log::trace!("operator output symmetrized, residual {herm_residual:.3e}");
        OperatorOutput {
            field: out,
            herm_residual,
        }
    }

    pub fn evaluate(&self, w: &WignerField, parts: Parts) -> Result<OperatorOutput> {
        let comps = self.components(w, parts)?;
        Ok(self.assemble(&comps, w, parts))
    }

    /// `C_diss^ε[W]`.
    pub fn collision_diss(&self, w: &WignerField) -> Result<WignerField> {
        Ok(self.evaluate(w, Parts::DISS)?.field)
    }

    pub fn collision_diss_direct(&self, w: &WignerField) -> Result<WignerField> {
        let comps = self.components_direct(w, Parts::DISS)?;
        Ok(self.assemble(&comps, w, Parts::DISS).field)
    }

    pub fn collision_diss_spectral(&self, w: &WignerField) -> Result<WignerField> {
        let comps = self.components_spectral(w, Parts::DISS)?;
        Ok(self.assemble(&comps, w, Parts::DISS).field)
    }

    /// Gain `𝒢[W] = A + A*`.
    pub fn gain(&self, w: &WignerField) -> Result<WignerField> {
        let comps = self.components(w, Parts::DISS)?;
        Ok(WignerField::from_fn(*w.grid(), |k| {
            (comps.a[k] + comps.a[k].adjoint()).hermitian_part()
        }))
    }

    /// Loss `𝒟[W] = A* + B*` (not Hermitian in general).
    pub fn loss(&self, w: &WignerField) -> Result<WignerField> {
        let comps = self.components(w, Parts::DISS)?;
        Ok(WignerField::from_fn(*w.grid(), |k| {
            comps.a[k].adjoint() + comps.b[k].adjoint()
        }))
    }

    /// `H_eff^ε[W]`.
    pub fn h_eff(&self, w: &WignerField) -> Result<WignerField> {
        let comps = self.components(w, Parts::HEFF)?;
        WignerField::new(*w.grid(), comps.h.expect("H_eff requested"))
    }

    /// `H_eff^ε[W]` from the four-term symmetric integrand
    /// `W₃J[W̃₂W₄] + J[W₄W̃₂]W₃ + W̃₃J[W₂W̃₄] + J[W̃₄W₂]W̃₃`, evaluated directly.
    pub fn h_eff_symmetric_form(&self, w: &WignerField) -> Result<WignerField> {
        self.check_field(w)?;
        let h = direct::h_eff_symmetric(&self.band, &self.params, w.as_slice());
        WignerField::new(*w.grid(), h)
    }

    /// `C_cons^ε[W] = −i[H_eff^ε[W], W]`.
    pub fn c_cons(&self, w: &WignerField) -> Result<WignerField> {
        Ok(self.evaluate(w, Parts::HEFF)?.field)
    }

    /// `C^ε[W] = C_diss^ε[W] + C_cons^ε[W]`.
    pub fn collision_full(&self, w: &WignerField) -> Result<WignerField> {
        Ok(self.evaluate(w, Parts::ALL)?.field)
    }

    /// Truncated operator `𝒢[Φw] − 𝒟[Φw]w − w𝒟[Φw]* − i[H[Φw], w]`.
    pub fn collision_truncated(&self, w: &WignerField) -> Result<WignerField> {
        let phi = w.map(|m| m.truncate_unchecked());
        let comps = self.components(&phi, Parts::ALL)?;
        Ok(self.assemble(&comps, w, Parts::ALL).field)
    }

    /// `N^{−d} Σ_k ω(k) tr C[W](k)` predicted from the swap symmetries:
    /// `N^{−3d} Σ L(ω̲) (ω̲/4) T` with `T` the trace of the dissipative
    /// integrand. Vanishes only when the kernel is supported on `ω̲ = 0`.
    pub fn off_shell_energy_rate(&self, w: &WignerField) -> Result<f64> {
        self.check_field(w)?;
        Ok(direct::off_shell_energy_rate(
            &self.band,
            self.params.epsilon,
            w.as_slice(),
        ))
    }

    /// Largest value of `π·σ_coll(k, 0)` over the grid for the collision sign
    /// vector; enters the explicit step-size heuristic.
    pub fn sigma_coll_max(&self) -> f64 {
        sigma_coll_sup(&self.band, self.params.epsilon)
    }
}
