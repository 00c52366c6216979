use std::io;
use std::path::{Path, PathBuf};

/// Errors of the file-level pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A core precondition or validation failed.
    #[error(transparent)]
    Core(#[from] lcd_core::Error),
    /// A file could not be read or written.
    #[error("{}: {source}", path.display())]
    Io {
        /// File involved.
        path: PathBuf,
        /// Underlying failure.
        source: io::Error,
    },
    /// A file does not follow its format.
    #[error("{}: {reason}", path.display())]
    Format {
        /// File involved.
        path: PathBuf,
        /// What is wrong.
        reason: String,
    },
    /// Invalid combination of arguments.
    #[error("{0}")]
    Usage(String),
    /// A benchmark child or other internal step failed unexpectedly.
    #[error("internal error: {0}")]
    Internal(String),
}

/// Result alias for this crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Process exit status for successful runs.
pub const EXIT_OK: i32 = 0;
/// Input or argument validation failed.
pub const EXIT_VALIDATION: i32 = 2;
/// A resource budget refused the request.
pub const EXIT_BUDGET: i32 = 3;
/// Anything else.
pub const EXIT_INTERNAL: i32 = 4;

impl Error {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn format(path: &Path, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.to_path_buf(),
            reason: reason.into(),
        }
    }

    /// Exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Core(lcd_core::Error::MemoryBudget { .. }) => EXIT_BUDGET,
            Error::Core(_) | Error::Format { .. } | Error::Usage(_) => EXIT_VALIDATION,
            Error::Io { source, .. } => match source.kind() {
                io::ErrorKind::NotFound | io::ErrorKind::InvalidData | io::ErrorKind::UnexpectedEof => {
                    EXIT_VALIDATION
                }
                _ => EXIT_INTERNAL,
            },
            Error::Internal(_) => EXIT_INTERNAL,
        }
    }
}
