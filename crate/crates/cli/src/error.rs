use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or schema-invalid input.
    #[error("{0}")]
    Config(String),
    /// Failure while running a valid configuration.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<laqw::Error> for CliError {
    fn from(e: laqw::Error) -> Self {
        use laqw::Error::*;
        match e {
            BudgetExceeded { .. } | Allocation { .. } | DimensionTooLarge { .. } | DisconnectedCoupling => {
                CliError::Runtime(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
