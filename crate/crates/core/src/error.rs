use thiserror::Error;

/// Errors raised by the analytic and simulation pipelines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("unbounded coupling window: {0}")]
    UnboundedWindow(String),
    #[error("delay {tau} s lies below the mirror delay {min} s")]
    Domain { tau: f64, min: f64 },
    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),
    #[error("delay statistics undefined: {0}")]
    UndefinedStats(String),
    #[error("config error at line {line}, key `{key}`: {msg}")]
    Config { line: usize, key: String, msg: String },
    #[error("i/o error on {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("at {key} = {value}: {source}")]
    AtSweepPoint { key: String, value: f64, source: Box<Error> },
}

impl Error {
    /// Process exit code for the CLI and status code for the C ABI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidScenario(_) => 2,
            Error::Io { .. } => 4,
            Error::AtSweepPoint { source, .. } => source.exit_code(),
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
