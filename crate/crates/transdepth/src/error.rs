//! Error types shared across the crate.

use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Broad classification of an error, used by callers (the CLI in
/// particular) to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input: dimensions, configuration, file contents, dataset layout.
    Validation,
    /// Failure talking to the filesystem.
    Io,
    /// A bug or an unexpected internal condition.
    Internal,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid raster dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },

    #[error("dimension mismatch in {context}: {expected_width}x{expected_height} vs {actual_width}x{actual_height}")]
    DimensionMismatch {
        context: &'static str,
        expected_width: usize,
        expected_height: usize,
        actual_width: usize,
        actual_height: usize,
    },

    #[error("invalid raster value: {0}")]
    InvalidValue(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty evaluation set: no pixel is both inside the mask and has valid ground truth")]
    EmptyEvaluation,

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("dataset layout error:\n{}", issues.join("\n"))]
    DatasetLayout { issues: Vec<String> },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidDimensions { .. }
            | Error::DimensionMismatch { .. }
            | Error::InvalidValue(_)
            | Error::Config(_)
            | Error::EmptyEvaluation
            | Error::Format { .. }
            | Error::DatasetLayout { .. } => ErrorClass::Validation,
            Error::Io { .. } => ErrorClass::Io,
            Error::Internal(_) => ErrorClass::Internal,
        }
    }
}

/// Checks that two rasters share dimensions, naming the operation on failure.
pub(crate) fn check_dims(
    context: &'static str,
    expected: (usize, usize),
    actual: (usize, usize),
) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected_width: expected.0,
            expected_height: expected.1,
            actual_width: actual.0,
            actual_height: actual.1,
        })
    }
}
