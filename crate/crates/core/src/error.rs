use std::path::PathBuf;

use thiserror::Error;

use crate::mesh::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("mesh is not admissible:\n{0}")]
    InadmissibleMesh(ValidationReport),

    #[error("size mismatch for {what}: expected {expected}, got {got}")]
    SizeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("singular linear system: {0}")]
    SingularMatrix(String),

    #[error("Newton step failed at iteration {iteration}: {reason}; |tau|_inf = {tau_inf:e}")]
    NewtonBreakdown {
        iteration: usize,
        reason: String,
        tau_inf: f64,
    },

    #[error("quadrature did not converge on [{a:e}, {b:e}] (estimated error {error:e})")]
    Quadrature { a: f64, b: f64, error: f64 },

    #[error("incompatible trajectories: {0}")]
    Incompatible(String),

    #[error("metric unavailable: {0}")]
    MetricRefused(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
