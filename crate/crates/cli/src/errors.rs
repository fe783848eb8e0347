//! CLI error type carrying the process exit code.
//!
//! Exit codes: 0 success, 2 configuration error, 3 parse error, 4 scoring
//! error; anything else maps to 1.

use std::fmt;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn config(message: impl fmt::Display) -> Self {
        CliError { code: 2, message: message.to_string() }
    }

    pub fn parse(message: impl fmt::Display) -> Self {
        CliError { code: 3, message: message.to_string() }
    }

    pub fn scoring(message: impl fmt::Display) -> Self {
        CliError { code: 4, message: message.to_string() }
    }

    pub fn other(message: impl fmt::Display) -> Self {
        CliError { code: 1, message: message.to_string() }
    }
}
