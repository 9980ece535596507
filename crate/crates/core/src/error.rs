use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("{what} did not converge (achieved residual {residual:.3e})")]
    NumericalConstruction { what: &'static str, residual: f64 },

    #[error("conjugate gradient stopped after {iterations} iterations with relative residual {residual:.3e}")]
    Solver { iterations: usize, residual: f64 },

    #[error("{which} eigenvalue iteration stopped after {iterations} iterations (relative change {residual:.3e})")]
    Eigensolver {
        which: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("dense eigensolver refuses dimension {n} (cap {cap})")]
    DimensionCap { n: usize, cap: usize },

    #[error("matrix is not positive definite (pivot {pivot} = {value:.3e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("root search: {0}")]
    RootSearch(String),

    #[error("assembly: {0}")]
    Assembly(String),

    #[error("time stepping diverged at step {step}")]
    Divergence { step: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid mesh: {0}")]
    Validation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
