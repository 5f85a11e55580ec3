use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid building parameters: {0}")]
    InvalidBuildingParams(String),
    #[error("UAV height {height} m outside path-loss validity range [{min}, {max}] m")]
    HeightOutOfRange { height: f64, min: f64, max: f64 },
    #[error("invalid action index {index} (action set has {k} actions)")]
    InvalidAction { index: usize, k: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("empty window")]
    EmptyWindow,
    #[error("outage probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("distance-based pretraining did not converge: validation mse {mse} after {iterations} iterations")]
    NonConvergence { mse: f64, iterations: usize },
    #[error("invalid mode `{0}` (expected `direct` or `snarm`)")]
    InvalidMode(String),
    #[error("missing input file {0}")]
    MissingInput(PathBuf),
    #[error("malformed input {path}: {msg}")]
    Malformed { path: PathBuf, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Stable snake_case tag for machine-readable error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "invalid_config",
            Error::InvalidBuildingParams(_) => "invalid_building_params",
            Error::HeightOutOfRange { .. } => "height_out_of_range",
            Error::InvalidAction { .. } => "invalid_action",
            Error::ShapeMismatch(_) => "shape_mismatch",
            Error::EmptyWindow => "empty_window",
            Error::ProbabilityOutOfRange(_) => "probability_out_of_range",
            Error::NonConvergence { .. } => "non_convergence",
            Error::InvalidMode(_) => "invalid_mode",
            Error::MissingInput(_) => "missing_input",
            Error::Malformed { .. } => "malformed_input",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
