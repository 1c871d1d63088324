use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },

    #[error("dimension mismatch in {}: expected {expected}, found {actual}", describe(paths))]
    DimensionMismatch {
        paths: Vec<PathBuf>,
        expected: String,
        actual: String,
    },

    #[error("missing file {}", path.display())]
    MissingFile { path: PathBuf },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid arguments: {0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] mvtc::Error),
}

fn describe(paths: &[PathBuf]) -> String {
    paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(" vs ")
}

/// One-line machine-readable form of an error, written to stderr by the binary.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub error: &'static str,
    pub message: String,
    pub exit_code: i32,
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            CliError::MissingFile { path }
        } else {
            CliError::Io { path, source }
        }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "ParseError",
            CliError::DimensionMismatch { .. } => "DimensionMismatch",
            CliError::MissingFile { .. } => "MissingFile",
            CliError::Io { .. } => "IoError",
            CliError::Usage(_) => "UsageError",
            CliError::Core(e) if e.is_numerical() => "NumericalError",
            CliError::Core(_) => "ValidationError",
        }
    }

    /// 3 for numerical failures inside the solver, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }

    pub fn record(&self) -> ErrorRecord {
        ErrorRecord {
            error: self.kind(),
            message: self.to_string(),
            exit_code: self.exit_code(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
