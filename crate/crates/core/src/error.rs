use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {} at row {row}, column {column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("dimension mismatch in group `{group}`: expected {expected} coordinates, found {found}")]
    DimensionMismatch {
        group: String,
        expected: usize,
        found: usize,
    },

    #[error("group `{0}` contains no points")]
    EmptyGroup(String),

    #[error("group `{group}` has a non-finite value at row {row}, column {column}")]
    NonFinite {
        group: String,
        row: usize,
        column: usize,
    },

    #[error("duplicate group id `{0}`")]
    DuplicateId(String),

    #[error("insufficient sample: {0}")]
    InsufficientSample(String),

    #[error("degenerate (zero) nearest-neighbor distance: {0}")]
    DegenerateDistance(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("affinity matrix is identically zero")]
    FlatAffinity,

    #[error("AUC is undefined: {0}")]
    UndefinedAuc(String),

    #[error("integral diverges: {0}")]
    Divergent(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by malformed input or flags, as opposed to a
    /// computation that could not be carried out on well-formed input.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Parse { .. }
                | Error::DimensionMismatch { .. }
                | Error::EmptyGroup(_)
                | Error::NonFinite { .. }
                | Error::DuplicateId(_)
                | Error::InsufficientSample(_)
                | Error::Config(_)
                | Error::Contract(_)
        )
    }
}
