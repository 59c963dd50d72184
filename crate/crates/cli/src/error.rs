use thiserror::Error;

/// Failures mapped onto the documented exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, unparsable or inconsistent input (exit 2).
    #[error("input error: {0}")]
    Input(String),
    /// A solver stopped before reaching its tolerance (exit 3).
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    /// A property campaign found a violation (exit 4).
    #[error("property violation: {0}")]
    Violation(String),
    /// The counterexample check did not reproduce the reference values (exit 5).
    #[error("verification mismatch: {0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Violation(_) => 4,
            CliError::Mismatch(_) => 5,
        }
    }
}

impl From<qhellinger::Error> for CliError {
    fn from(e: qhellinger::Error) -> Self {
        match e {
            qhellinger::Error::NonConvergence { .. } => CliError::NonConvergence(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
