use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulator and the sweep engine.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of range or inconsistent. `field` is the
    /// dotted path of the offending key.
    #[error("invalid configuration at `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    /// Bookkeeping invariant broken inside a run (e.g. an allocation that
    /// points at an entity nobody owns).
    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("journal {path}: {reason}")]
    Journal { path: PathBuf, reason: String },

    #[error("run ({scenario_id}, {rep}) failed after {attempts} attempts")]
    WorkerFailed {
        scenario_id: u64,
        rep: u32,
        attempts: u32,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by user input (bad config, bad reference data).
    pub fn is_user_error(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::Json { .. } | Error::Csv { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
