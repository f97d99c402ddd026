use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration value; `path` names the offending field.
    #[error("invalid configuration at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("length mismatch: expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("fields live on different grids ({left_points}/{left_modes} vs {right_points}/{right_modes})")]
    GridMismatch {
        left_points: usize,
        left_modes: usize,
        right_points: usize,
        right_modes: usize,
    },

    #[error("imaginary residue {residue:e} after inverse transform; field is not Hermitian")]
    SymmetryViolation { residue: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("time integration diverged at t = {time} (last valid state kept)")]
    Divergence {
        time: f64,
        last_state: Box<crate::spectral::SpectralField>,
    },

    #[error("conjugate gradient stalled after {iterations} iterations (relative residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error(
        "Picard iteration diverged at iteration {iteration}; reduce the H^s norms of u0 and u1 (increments: {increments:?})"
    )]
    SmallnessViolation {
        iteration: usize,
        increments: Vec<f64>,
    },

    #[error("degenerate decay fit: {0}")]
    DegenerateFit(String),

    #[error("trajectory is empty")]
    EmptyTrajectory,

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit status: 2 for invalid input, 3 for a diverged time
    /// integration, 4 for a control solver that failed to converge.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Divergence { .. } => 3,
            Error::NonConvergence { .. } | Error::SmallnessViolation { .. } => 4,
            Error::Io { .. } => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
