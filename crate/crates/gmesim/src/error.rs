//! Error taxonomy for the simulator.
//!
//! The variants map onto the process exit codes used by the CLI:
//! validation and configuration problems exit with 1, numerical-accuracy
//! failures with 2, and I/O problems with 3.

use thiserror::Error;

/// Crate-wide result alias.
pub type GmeResult<T> = Result<T, GmeError>;

#[derive(Debug, Error)]
pub enum GmeError {
    /// Physically invalid input (non-positive mass, superluminal ramp,
    /// inconsistent window, ...). The message lists every violation found,
    /// not just the first.
    #[error("validation failed:\n{0}")]
    Validation(String),

    /// A quantity was requested outside its domain (non-finite time,
    /// malformed axis, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An internal iterative solver failed to converge.
    #[error("solver failed: {0}")]
    Solver(String),

    /// Two points that must stay separated became coincident
    /// (kernel denominators vanish).
    #[error("singular separation: {0}")]
    Singular(String),

    /// Quadrature or extrapolation could not reach the requested accuracy;
    /// the message carries the achieved error estimate.
    #[error("accuracy not reached: {0}")]
    Accuracy(String),

    /// The run configuration is structurally valid but violates a model
    /// assumption (e.g. branch-symmetry requirements of the perturbative
    /// assembly).
    #[error("configuration error: {0}")]
    Configuration(String),

    /// Config file could not be parsed; the message names the offending
    /// field or line.
    #[error("config parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl GmeError {
    /// CLI exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            GmeError::Validation(_)
            | GmeError::Domain(_)
            | GmeError::Configuration(_)
            | GmeError::Parse(_) => 1,
            GmeError::Solver(_) | GmeError::Singular(_) | GmeError::Accuracy(_) => 2,
            GmeError::Io(_) => 3,
        }
    }
}
