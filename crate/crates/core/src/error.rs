use thiserror::Error;

/// Errors raised anywhere in the identification, simulation and detection pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a mathematical operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A configuration value or combination of values is not usable.
    #[error("configuration error: {0}")]
    Config(String),
    /// Input data violates an invariant of its type.
    #[error("validation error: {0}")]
    Validation(String),
    /// A numerical procedure failed (non-convergence, singular system, non-finite state).
    #[error("numerical error: {0}")]
    Numerical(String),
    /// Malformed file content.
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Validation(_) | Error::Parse(_) | Error::Io(_) => 2,
            Error::Domain(_) | Error::Numerical(_) => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
