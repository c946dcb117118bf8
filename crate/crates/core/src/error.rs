use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
///
/// Variants split into two families: input problems (bad dimensions,
/// parameters, files) and runtime/numerical failures. [`Error::is_input`]
/// tells them apart; the CLI maps them to exit codes 2 and 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("no convergence after {iterations} iterations (residual norm {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("degenerate task: Jacobian has no null space at this configuration")]
    DegenerateTask,

    #[error("expected a 1-dimensional null space, found {0}")]
    NullSpaceDimension(usize),

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("degenerate query: field gradient vanishes")]
    DegenerateQuery,

    #[error("path stalled: distance did not decrease for {0} consecutive steps")]
    Stall(usize),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    /// True for errors caused by the caller's input rather than by the computation.
    pub fn is_input(&self) -> bool {
        matches!(
            self,
            Error::Dimension { .. }
                | Error::Parameter(_)
                | Error::Input(_)
                | Error::Io { .. }
                | Error::Parse { .. }
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse { path: path.into(), message: message.to_string() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
