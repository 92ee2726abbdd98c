//! Manifest-driven runs of the b-family laboratory: parsing, execution,
//! persistence and the sweep pool behind the `bfamily` binary.

pub mod analyze;
pub mod manifest;
pub mod runner;
pub mod snapshot;

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt snapshot {path}: {reason}")]
    Snapshot { path: PathBuf, reason: String },
}

impl LabError {
    /// Process exit status: 2 for configuration problems, 3 for I/O and data.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            LabError::Io { .. } | LabError::Snapshot { .. } => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> LabError {
        let path = path.into();
        move |source| LabError::Io { path, source }
    }
}

impl From<bfamily_core::Error> for LabError {
    fn from(e: bfamily_core::Error) -> Self {
        LabError::Config(e.to_string())
    }
}

pub type LabResult<T> = std::result::Result<T, LabError>;
