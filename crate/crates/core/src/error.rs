use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid layout: {0}")]
    Validation(String),

    #[error("unknown cell label `{0}`")]
    UnknownCell(String),

    #[error("unknown element `{0}`")]
    UnknownElement(String),

    #[error("basis has {size} states, above the hard limit of {limit}")]
    BasisTooLarge { size: usize, limit: usize },

    #[error("eigensolver did not converge: residual {residual:.3e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },

    #[error("unassignable eigenstate {index}: best overlap {overlap:.3e}")]
    Unassignable { index: usize, overlap: f64 },

    #[error("block not spectrally separable: {0}")]
    NotSeparable(String),

    #[error("missing dressed energy for computational state {0}")]
    MissingEnergy(String),

    #[error("{0}")]
    Precondition(String),

    #[error("resonant coupler: use exact path")]
    ResonantCoupler,

    #[error("non-perturbative: {0}")]
    NonPerturbative(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("unphysical noise parameters: {0}")]
    Noise(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
