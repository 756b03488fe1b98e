use std::path::PathBuf;

use thiserror::Error;

use crate::fleet::Fuel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no unit-size pool for fuel {0} with a positive capacity target")]
    MissingPool(Fuel),

    #[error("unknown fuel type {0:?}")]
    UnknownFuel(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("authentication failed: {0}")]
    Auth(String),

    #[error("fetch failed: {0}")]
    Fetch(String),

    #[error("statistics error: {0}")]
    Stats(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("cache entry {path} is corrupt: {reason}")]
    CorruptCache { path: PathBuf, reason: String },

    #[error("stage `{stage}` failed on {path}: {source}")]
    Stage {
        stage: &'static str,
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }

    /// Wraps `self` with the pipeline stage and the input path it was processing.
    pub fn in_stage(self, stage: &'static str, path: impl Into<PathBuf>) -> Self {
        match self {
            // keep the innermost stage
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                path: path.into(),
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, looking through stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }

    /// Process exit code for the command-line front end.
    ///
    /// `0` is success, `2` is reserved for argument errors reported by clap.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Usage(_) => 2,
            Error::Auth(_) => 3,
            Error::Fetch(_) => 4,
            Error::Parse { .. } | Error::Csv(_) | Error::Json(_) => 5,
            Error::Stats(_) => 6,
            Error::CorruptCache { .. } => 7,
            _ => 1,
        }
    }
}
