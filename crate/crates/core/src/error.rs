use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("contour needs {needed} samples but only {available} elements were requested")]
    ContourTooLarge { needed: usize, available: usize },

    #[error("kernel value {0} is not positive; distance is undefined at this resolution")]
    UndefinedDistance(f64),

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("leading eigenvalue {0} is not positive")]
    NonPositiveEigenvalue(f64),

    #[error("stationary system is singular at mu = {mu} (critical value)")]
    Singular { mu: f64 },

    #[error("simulation diverged at t = {time}: non-finite activity (dt too large?)")]
    NonFinite { time: f64 },

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a numerical method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::NonPositiveEigenvalue(_)
                | Error::Singular { .. }
                | Error::NonFinite { .. }
                | Error::UndefinedDistance(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
