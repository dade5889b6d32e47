use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid problem: {0}")]
    InvalidSpec(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("singular tridiagonal system at row {row}")]
    Singular { row: usize },

    #[error("scheme violation at t = {t}: u[{node}] = {value:e} is below the nonnegativity floor")]
    SchemeViolation { t: f64, node: usize, value: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("config: {0}")]
    Config(String),

    #[error("run failed at t = {t}: {source}")]
    Run {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}
