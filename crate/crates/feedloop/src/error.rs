use std::path::PathBuf;

/// Process exit codes used by the `feedloop` binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    VerifyFailed = 1,
    InvalidInput = 2,
    Io = 3,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: feedloop_core::Error,
    },
    #[error("malformed CSV {path}: {reason}")]
    Csv { path: PathBuf, reason: String },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) | CliError::Core { .. } | CliError::Csv { .. } => {
                ExitCode::InvalidInput
            }
            CliError::Io { .. } => ExitCode::Io,
            CliError::Verify(_) => ExitCode::VerifyFailed,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn core(context: impl Into<String>, source: feedloop_core::Error) -> Self {
        CliError::Core {
            context: context.into(),
            source,
        }
    }
}
