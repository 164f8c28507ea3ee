use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<pullback_core::Error> for CliError {
    fn from(e: pullback_core::Error) -> Self {
        use pullback_core::Error::*;
        match e {
            DimensionMismatch { .. }
            | OutOfRange(_)
            | TooFewSamples(_)
            | MissingKernelEntry(_)
            | TermCap { .. }
            | NotHermitian(_)
            | UnknownMap(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(e.to_string())
    }
}
