use std::process::ExitCode;

/// Failure classes for the command-line tool, each with a stable exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad configuration: unknown key, malformed value, or a parameter the
    /// underlying model rejects. Exit code 2.
    #[error("config error: {0}")]
    Config(String),
    /// A computation failed numerically (non-finite intermediate, failed
    /// search, too few detected peaks). Exit code 3.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// Filesystem trouble while reading configs or writing results. Exit code 1.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Numeric(_) => ExitCode::from(3),
            CliError::Io(_) => ExitCode::from(1),
        }
    }
}

impl From<wpc_core::Error> for CliError {
    fn from(err: wpc_core::Error) -> Self {
        match err {
            // Runtime numeric breakdowns keep their own exit code; everything
            // else a model rejects is a bad parameter choice.
            wpc_core::Error::Numeric(_) | wpc_core::Error::TooFewPeaks { .. } => {
                CliError::Numeric(err.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
