use std::path::PathBuf;

/// Errors from file formats, the sweep harness and the command line.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] datacopy_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("dimension mismatch at line {line}: expected {expected} fields, found {found}")]
    Ragged {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}, column {column}: cannot parse {token:?} as a number")]
    Parse {
        line: usize,
        column: usize,
        token: String,
    },

    #[error("no data rows")]
    NoRows,

    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 3 for statistical degeneracy, 2 for everything
    /// else (bad input, bad flags, unreadable files).
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(datacopy_core::Error::NoRepresentedCells)
            | CliError::Core(datacopy_core::Error::DegenerateBandwidth) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
