use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<propeller::Error> for CliError {
    fn from(e: propeller::Error) -> Self {
        use propeller::Error as E;
        match e {
            E::Parameter(_) | E::Protocol(_) => CliError::Config(e.to_string()),
            E::Truncation { .. } | E::Integrator { .. } | E::Dimension { .. } => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(format!("manifest: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
