use std::process::ExitCode;

use rankdiff_core::Error as CoreError;

/// Failure of a command, classified by the exit code it maps to.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Exit 2: unreadable or invalid configuration, failed model validation,
    /// or an output location that cannot be written.
    #[error("configuration error: {0}")]
    Config(String),
    /// Exit 3: an `(s, t)` point outside the Laplace domain in strict mode.
    #[error("Laplace domain error: {0}")]
    Domain(String),
    /// Exit 4: a statistical gate or numerical routine failed.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Numerical(_) => 4,
        })
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter(_)
            | CoreError::OutOfRange { .. }
            | CoreError::InvalidModel(_)
            | CoreError::SizeCap(_)
            | CoreError::Dimension(_) => CliError::Config(e.to_string()),
            CoreError::LaplaceDomain { .. } | CoreError::Infeasible { .. } => CliError::Domain(e.to_string()),
            CoreError::Quadrature { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Config(format!("csv output: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
