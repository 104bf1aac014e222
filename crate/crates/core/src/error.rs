use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the solver and its diagnostics.
///
/// The `Display` strings start with the short machine-readable tags used in
/// reports and in the CLI output.
#[derive(Debug, Error)]
pub enum HbkError {
    #[error("not-hermitian: residual {residual:.3e} exceeds tolerance {tol:.1e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("not-psd: minimum eigenvalue {min_eig:.3e} below -{tol:.1e}")]
    NotPsd { min_eig: f64, tol: f64 },

    #[error("bad-regulator: epsilon must be positive and finite, got {0}")]
    BadRegulator(f64),

    #[error("bad-regulator: epsilon {epsilon} is below the grid floor {floor:.4} (kappa {kappa}, N {n})")]
    BelowFloor {
        epsilon: f64,
        floor: f64,
        kappa: f64,
        n: usize,
    },

    #[error("grid-mismatch: {0}")]
    GridMismatch(String),

    #[error("spectral-quadrature-underresolved: exp(-epsilon * s_max) = {tail:.3e} > 1e-10")]
    SpectralUnderresolved { tail: f64 },

    #[error("bad-radius: mollifier radius must lie in (0, 1/2), got {0}")]
    BadRadius(f64),

    #[error("dt-too-large: fermi residual {residual:.3e} after step at t = {t}")]
    DtTooLarge { residual: f64, t: f64 },

    #[error("empty-input: {0}")]
    EmptyInput(&'static str),

    #[error("bad-schedule: {0}")]
    BadSchedule(String),

    #[error("window-too-long: t_max {t_max} exceeds N/4 = {limit}")]
    WindowTooLong { t_max: f64, limit: f64 },

    #[error("resolution-too-coarse: {0}")]
    ResolutionTooCoarse(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("format error in {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = HbkError> = std::result::Result<T, E>;

impl HbkError {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        HbkError::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
