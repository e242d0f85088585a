use thiserror::Error;

/// Errors raised by the estimation and testing pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sample too short: n = {n}, need at least {min}")]
    TooShort { n: usize, min: usize },

    #[error("underdetermined regression: {regressors} regressors for {rows} observations")]
    Underdetermined { regressors: usize, rows: usize },

    #[error("ill-conditioned design (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dense oracle limited to n <= {max}, got {n}")]
    TooLarge { n: usize, max: usize },

    #[error("power iteration did not converge after {iterations} iterations (last estimate {last})")]
    NoConvergence { iterations: usize, last: f64 },

    #[error("empty kernel window at t = {t} with bandwidth {h}")]
    EmptyWindow { t: f64, h: f64 },

    #[error("eigendecomposition failed")]
    Decomposition,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures caused by the numerics rather than by the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IllConditioned { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::NoConvergence { .. }
                | Error::EmptyWindow { .. }
                | Error::Decomposition
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
