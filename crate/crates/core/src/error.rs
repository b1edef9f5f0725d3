use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("invalid label {value} at index {index} (expected -1 or +1)")]
    InvalidLabel { index: usize, value: i64 },

    #[error("dataset contains a single class ({label:+}); both -1 and +1 are required")]
    SingleClass { label: i8 },

    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparam(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("linear solve failed in {0} (matrix not positive definite after jitter)")]
    LinearSolve(&'static str),

    #[error("non-binary sample weight {value} at index {index}")]
    NonBinaryWeight { index: usize, value: f64 },

    #[error("solver failed at outer iteration {iteration}: {source}")]
    Solver {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("fit failed at repeat {repeat}, fold {fold}, lambda {lambda}: {source}")]
    CvCell {
        repeat: usize,
        fold: usize,
        lambda: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("infeasible synthetic config: {0}")]
    Infeasible(String),

    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("model file schema version mismatch: expected {expected}, found {found:?}")]
    VersionMismatch { expected: &'static str, found: String },
}

impl Error {
    /// Whether the error originates in the numerical solvers rather than in
    /// the input data or configuration.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::LinearSolve(_) => true,
            Error::Solver { source, .. } | Error::CvCell { source, .. } => {
                source.is_solver_failure()
            }
            _ => false,
        }
    }
}
