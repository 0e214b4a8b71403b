//! CLI error taxonomy mapped to exit codes: config errors exit 2,
//! numerical failures 3, verification failures 4.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Verification(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(out, "config error: {msg}"),
            CliError::Numerical(msg) => write!(out, "numerical failure: {msg}"),
            CliError::Verification(msg) => write!(out, "verification failure: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Verification(_) => 4,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("io: {e}"))
    }
}

impl From<hotspot_core::Error> for CliError {
    fn from(e: hotspot_core::Error) -> Self {
        match e {
            hotspot_core::Error::NumericalBlowup { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
