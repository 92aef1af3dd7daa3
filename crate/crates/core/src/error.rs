use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("basis degree {degree} exceeds the supported limit {limit}")]
    DegreeOutOfRange { degree: usize, limit: usize },

    #[error("invalid distribution: lower bound {lower} must be below upper bound {upper}")]
    InvalidDistribution { lower: f64, upper: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid Runge-Kutta scheme: {0}")]
    InvalidScheme(String),

    #[error("solver blow-up at t = {time} in stage {stage}")]
    BlowUp { time: f64, stage: usize },

    #[error("trajectory is missing the derivative at node {0}")]
    MissingDerivative(usize),

    #[error("time {t} lies outside the reconstructed range [{start}, {end}]")]
    TimeOutOfRange { t: f64, start: f64, end: f64 },

    #[error("singular lifting system for degree {0}")]
    SingularLifting(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown test case `{0}`")]
    UnknownCase(String),

    #[error("malformed table: {0}")]
    Table(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 for solver blow-up, 2 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BlowUp { .. } => 1,
            _ => 2,
        }
    }
}
