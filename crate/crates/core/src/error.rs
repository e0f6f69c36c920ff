use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside its admissible range.
    #[error("{0}")]
    Invalid(String),

    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("kernel cutoff below band floor: f0 = {f0} < C^(2/(3-beta)) = {floor}")]
    BandFloor { f0: f64, floor: f64 },

    #[error("kernel for cutoff f = {0} is empty")]
    EmptyKernel(f64),

    #[error(
        "{0} requires power-law metadata (beta, zeta, x0); the sequence was loaded without it"
    )]
    MissingPowerLaw(&'static str),

    #[error("malformed input at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("invalid config at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("cannot access {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("at grid point n={n}, a={a}")]
    GridPoint {
        n: usize,
        a: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than by the environment.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Io { .. } | Error::Csv(_) => false,
            Error::GridPoint { source, .. } => source.is_validation(),
            _ => true,
        }
    }
}
