use thiserror::Error;

/// Failure classes, each with its own process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<paseed::Error> for CliError {
    fn from(e: paseed::Error) -> Self {
        use paseed::Error as E;
        match e {
            E::Tree(_) | E::Growth(_) | E::Config(_) => CliError::Config(e.to_string()),
            E::Numeric(_) | E::TruncationExceeded { .. } => CliError::Numeric(e.to_string()),
            E::Io(_) => CliError::Io(e.to_string()),
        }
    }
}

impl From<paseed::GrowthError> for CliError {
    fn from(e: paseed::GrowthError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<paseed::TreeError> for CliError {
    fn from(e: paseed::TreeError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<paseed::NumericError> for CliError {
    fn from(e: paseed::NumericError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
