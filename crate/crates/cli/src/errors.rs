use std::path::PathBuf;
use thiserror::Error;

/// CLI failures split by exit code: everything about reading and
/// validating inputs is a parse error (exit 2), failures raised by the
/// index computations are domain errors (exit 3).
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Domain(#[from] segdiv::Error),

    #[error("{path}: {source}")]
    DomainAt {
        path: PathBuf,
        source: segdiv::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } | CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Domain(_) | CliError::DomainAt { .. } => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "parse",
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Domain(_) | CliError::DomainAt { .. } => "domain",
        }
    }

    /// Attaches the originating input file to a bare domain error.
    pub fn with_input(self, path: &std::path::Path) -> Self {
        match self {
            CliError::Domain(source) => CliError::DomainAt {
                path: path.to_path_buf(),
                source,
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
