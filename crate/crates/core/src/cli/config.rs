//! `RunConfig`: the TOML experiment description shared by all commands.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::collision::{mollify, Backend, CollisionOperator, CollisionParams};
use crate::diagnostics::StudyOperator;
use crate::dispersion_validation::{BoxResolution, MIN_ALPHA_RESOLUTION};
use crate::error::{HbkError, Result};
use crate::evolution::IntegratorConfig;
use crate::field::WignerField;
use crate::lattice::{read_grid_csv, Band, Dispersion, SignVector, TorusGrid};
use crate::spin::SpinMatrix;

use super::io::read_snapshot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub d: usize,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DispersionConfig {
    NearestNeighbor {
        #[serde(default)]
        c: f64,
    },
    /// CSV with header `j1..jd,omega`.
    Tabulated { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Spin-up Gaussian bump at the origin over a flat spin-down background.
    PolarizedBump,
    /// `w(k) = 1/2 + cos(2π k¹)/4` in both spin components.
    SmoothCosine,
    /// Independent random matrices with spectrum in `[0, 1]`, from `seed`.
    RandomFermi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    /// `W ≡ w·I`.
    Constant {
        w: f64,
    },
    /// CSV with header `j1..jd,up,down`.
    Diagonal {
        path: PathBuf,
    },
    /// HBWF snapshot.
    Field {
        path: PathBuf,
    },
    Preset {
        name: Preset,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpsilonStudyConfig {
    /// `(N, ε)` pairs with ε decreasing.
    pub schedule: Vec<(usize, f64)>,
    pub operator: StudyOperator,
    pub compare_sharp: bool,
}

impl Default for EpsilonStudyConfig {
    fn default() -> Self {
        Self {
            schedule: vec![(64, 0.4), (128, 0.2), (256, 0.1)],
            operator: StudyOperator::HEff,
            compare_sharp: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SigmaCollConfig {
    /// Base point as a grid index.
    pub k1: usize,
    pub sigma: SignVector,
    /// The α range is `sup|Ω̃| + margin·ε` on each side.
    pub margin: f64,
    /// Defaults to `ε/4`.
    pub d_alpha: Option<f64>,
}

impl Default for SigmaCollConfig {
    fn default() -> Self {
        Self {
            k1: 0,
            sigma: SignVector::COLLISION,
            margin: 2000.0,
            d_alpha: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionValidationConfig {
    /// Lattice size per axis for the propagator decay of product-form bands.
    pub axis_n: usize,
    pub t_max: f64,
    pub samples: usize,
    pub bessel_r_max: f64,
    pub bessel_step: f64,
    pub integrability: bool,
    pub boxes: Vec<f64>,
    pub s_step: f64,
    pub alpha_points: usize,
    /// Dimensions for the box integrals; defaults to `grid.d`.
    pub dims: Option<Vec<u32>>,
    pub sigma: SignVector,
}

impl Default for DispersionValidationConfig {
    fn default() -> Self {
        Self {
            axis_n: 512,
            t_max: 40.0,
            samples: 64,
            bessel_r_max: 200.0,
            bessel_step: 0.05,
            integrability: true,
            boxes: vec![2.0, 4.0, 8.0],
            s_step: 0.5,
            alpha_points: MIN_ALPHA_RESOLUTION,
            dims: None,
            sigma: SignVector::COLLISION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(with = "seed_repr")]
    pub seed: u64,
    pub output_dir: PathBuf,
    pub grid: GridConfig,
    pub dispersion: DispersionConfig,
    pub collision: CollisionParams,
    pub integrator: IntegratorConfig,
    pub initial_data: InitialData,
    pub mollify_delta: Option<f64>,
    pub epsilon_study: EpsilonStudyConfig,
    pub sigma_coll: SigmaCollConfig,
    pub dispersion_validation: DispersionValidationConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: PathBuf::from("hbk-out"),
            grid: GridConfig { d: 1, n: 16 },
            dispersion: DispersionConfig::NearestNeighbor { c: 0.0 },
            collision: CollisionParams::new(0.5),
            integrator: IntegratorConfig {
                record_every: 10,
                ..IntegratorConfig::default()
            },
            initial_data: InitialData::Preset {
                name: Preset::PolarizedBump,
            },
            mollify_delta: None,
            epsilon_study: EpsilonStudyConfig::default(),
            sigma_coll: SigmaCollConfig::default(),
            dispersion_validation: DispersionValidationConfig::default(),
        }
    }
}

/// TOML integers are signed; seeds above `i64::MAX` are written as strings.
mod seed_repr {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*seed) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&seed.to_string()),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(u64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Int(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

fn under(field: &str, e: HbkError) -> HbkError {
    match e {
        HbkError::Config { .. } => e,
        other => HbkError::config(field, other.to_string()),
    }
}

impl RunConfig {
    /// Parses TOML text; relative paths resolve against `base`.
    pub fn from_toml_str(text: &str, base: Option<&Path>) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        let mut cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            HbkError::config(
                if path == "." { "<root>".into() } else { path },
                e.inner().message().to_string(),
            )
        })?;
        if let Some(base) = base {
            cfg.resolve_paths(base);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HbkError::config("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text, path.parent())
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let DispersionConfig::Tabulated { path } = &mut self.dispersion {
            fix(path);
        }
        match &mut self.initial_data {
            InitialData::Diagonal { path } | InitialData::Field { path } => fix(path),
            _ => {}
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks every precondition that does not need the data files.
    pub fn validate(&self) -> Result<()> {
        self.grid().map_err(|e| under("grid", e))?;
        let c = &self.collision;
        if !(c.epsilon > 0.0 && c.epsilon.is_finite()) {
            return Err(HbkError::config("collision.epsilon", "must be positive and finite"));
        }
        if !(c.kappa > 0.0) {
            return Err(HbkError::config("collision.kappa", "must be positive"));
        }
        self.integrator.validate()?;
        if let InitialData::Constant { w } = self.initial_data {
            if !w.is_finite() {
                return Err(HbkError::config("initial_data.w", "must be finite"));
            }
        }
        if let Some(delta) = self.mollify_delta {
            if !(delta > 0.0 && delta < 0.5) {
                return Err(HbkError::config("mollify_delta", "must lie in (0, 1/2)"));
            }
        }
        for (field, path) in self.data_paths() {
            if !path.is_file() {
                return Err(HbkError::config(field, format!("file not found: {}", path.display())));
            }
        }
        let es = &self.epsilon_study;
        if es.schedule.len() < 2 {
            return Err(HbkError::config(
                "epsilon_study.schedule",
                "need at least two (N, epsilon) pairs",
            ));
        }
        let sc = &self.sigma_coll;
        if sc.k1 >= self.grid.n.pow(self.grid.d as u32) {
            return Err(HbkError::config("sigma_coll.k1", "index outside the grid"));
        }
        if !(sc.margin > 0.0) || sc.d_alpha.is_some_and(|d| !(d > 0.0)) {
            return Err(HbkError::config("sigma_coll", "margin and d_alpha must be positive"));
        }
        let dv = &self.dispersion_validation;
        if dv.samples < 4 || !(dv.t_max > 0.0) {
            return Err(HbkError::config(
                "dispersion_validation.samples",
                "need t_max > 0 and at least four samples",
            ));
        }
        if !(dv.bessel_r_max > 0.0 && dv.bessel_step > 0.0) {
            return Err(HbkError::config(
                "dispersion_validation.bessel_step",
                "must be positive",
            ));
        }
        Ok(())
    }

    fn data_paths(&self) -> Vec<(&'static str, &Path)> {
        let mut out = Vec::new();
        if let DispersionConfig::Tabulated { path } = &self.dispersion {
            out.push(("dispersion.path", path.as_path()));
        }
        match &self.initial_data {
            InitialData::Diagonal { path } | InitialData::Field { path } => {
                out.push(("initial_data.path", path.as_path()))
            }
            _ => {}
        }
        out
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.grid.d, self.grid.n)
    }

    pub fn dispersion(&self) -> Result<Dispersion> {
        match &self.dispersion {
            DispersionConfig::NearestNeighbor { c } => Ok(Dispersion::nearest_neighbor(*c)),
            DispersionConfig::Tabulated { path } => {
                Dispersion::from_csv(path, self.grid()?).map_err(|e| under("dispersion.path", e))
            }
        }
    }

    pub fn band(&self) -> Result<Band> {
        self.dispersion()?.sample(&self.grid()?)
    }

    pub fn operator(&self) -> Result<CollisionOperator> {
        CollisionOperator::new(self.band()?, self.collision).map_err(|e| under("collision.epsilon", e))
    }

    /// Initial data on `grid`, mollified when `mollify_delta` is set.
    pub fn initial_field(&self, grid: TorusGrid) -> Result<WignerField> {
        let w = match &self.initial_data {
            InitialData::Constant { w } => WignerField::constant(grid, SpinMatrix::scalar(*w)),
            InitialData::Diagonal { path } => {
                let cols = read_grid_csv(path, &grid, &["up", "down"]).map_err(|e| under("initial_data.path", e))?;
                WignerField::diagonal(grid, &cols[0], &cols[1])?
            }
            InitialData::Field { path } => {
                let (w, _) = read_snapshot(path).map_err(|e| under("initial_data.path", e))?;
                if w.grid() != &grid {
                    return Err(HbkError::config(
                        "initial_data.path",
                        format!(
                            "snapshot grid {:?} differs from the configured grid {:?}",
                            w.grid(),
                            grid
                        ),
                    ));
                }
                let herm = w.herm_residual();
                if herm > crate::spin::TOL_HERM {
                    return Err(HbkError::config(
                        "initial_data.path",
                        format!("field is not Hermitian (residual {herm:.3e})"),
                    ));
                }
                w
            }
            InitialData::Preset { name } => preset(*name, grid, self.seed),
        };
        match self.mollify_delta {
            Some(delta) => mollify(&w, delta).map_err(|e| under("mollify_delta", e)),
            None => Ok(w),
        }
    }

    pub fn box_resolution(&self) -> BoxResolution {
        BoxResolution {
            s_step: self.dispersion_validation.s_step,
            alpha_points: self.dispersion_validation.alpha_points,
        }
    }

    pub fn uses_direct_backend(&self) -> bool {
        self.collision.backend == Backend::Direct
    }
}

pub fn preset(name: Preset, grid: TorusGrid, seed: u64) -> WignerField {
    use rand::SeedableRng;
    match name {
        Preset::PolarizedBump => WignerField::from_fn(grid, |k| {
            let r = grid.torus_norm(k);
            SpinMatrix::diag(0.1 + 0.8 * (-r * r / (2.0 * 0.1 * 0.1)).exp(), 0.3)
        }),
        Preset::SmoothCosine => WignerField::from_fn(grid, |k| {
            SpinMatrix::scalar(0.5 + 0.25 * (2.0 * PI * grid.point(k)[0]).cos())
        }),
        Preset::RandomFermi => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            WignerField::random_fermi(grid, &mut rng)
        }
    }
}
