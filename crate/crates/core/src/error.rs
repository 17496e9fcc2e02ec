use thiserror::Error;

/// Errors raised by the optimizer and its building blocks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("parameter `{name}` value {value} outside [{lower}, {upper}]")]
    OutOfBounds {
        name: String,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("invalid parameter space: {0}")]
    InvalidSpace(String),

    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("frequency {freq} GHz outside grid span [{lo}, {hi}]")]
    FrequencyOutOfSpan { freq: f64, lo: f64, hi: f64 },

    #[error("invalid objective: {0}")]
    InvalidObjective(String),

    #[error("invalid design of experiments: {0}")]
    InvalidDoe(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid surrogate: {0}")]
    InvalidSurrogate(String),

    #[error("solver failed at {x:?}: {source}")]
    Solver {
        x: Vec<f64>,
        #[source]
        source: SolverError,
    },

    #[error("optimization aborted after {} evaluations: {source}", history.len())]
    Aborted {
        history: Box<crate::driver::RunHistory>,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Failure of a single solver call.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("{0}")]
    Domain(String),

    #[error("external solver failed ({status}): {stderr}")]
    ExitStatus { status: String, stderr: String },

    #[error("malformed solver response: {0}")]
    Response(String),

    #[error("solver i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
