use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("state {w} outside [{lo}, {hi}]")]
    StateOutOfBounds { w: f64, lo: f64, hi: f64 },

    #[error("{what}: argument {arg:e} exceeds the overflow cap {cap}")]
    Overflow {
        what: &'static str,
        arg: f64,
        cap: f64,
    },

    #[error("outside the tunnel-barrier validity window: {0}")]
    OutOfValidityRange(String),

    #[error("root solve did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("adaptive step fell below dt_min={dt_min:e} at t={t:e}")]
    SolverDiverged { t: f64, dt_min: f64 },

    #[error("at t={t:e} s: {source}")]
    AtTime {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("config: {0}")]
    Config(String),

    #[error("scenario `{name}`: {source}")]
    Scenario {
        name: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed trace CSV: {0}")]
    MalformedTrace(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at(self, t: f64) -> Self {
        match self {
            e @ Error::AtTime { .. } => e,
            e => Error::AtTime {
                t,
                source: Box::new(e),
            },
        }
    }

    /// True for failures raised while simulating (model or solver), as
    /// opposed to bad input files or configuration.
    pub fn is_runtime(&self) -> bool {
        match self {
            Error::StateOutOfBounds { .. }
            | Error::Overflow { .. }
            | Error::OutOfValidityRange(_)
            | Error::NoConvergence { .. }
            | Error::SolverDiverged { .. } => true,
            Error::AtTime { source, .. } | Error::Scenario { source, .. } => source.is_runtime(),
            Error::InvalidParameter { .. }
            | Error::InsufficientData(_)
            | Error::Config(_)
            | Error::Io { .. }
            | Error::MalformedTrace(_) => false,
        }
    }
}
