use std::fmt;
use std::path::Path;

use qhyper_core::Error;

pub const CHECK_FAILED: u8 = 1;
pub const USAGE: u8 = 2;
pub const NUMERICAL: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: USAGE,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: NUMERICAL,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        Self::usage(format!("{}: {err}", path.display()))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Json(_)
            | Error::Format(_)
            | Error::Dimension { .. }
            | Error::QubitCount(_)
            | Error::NonFinite(_)
            | Error::MultiIndex(_)
            | Error::Descriptor(_)
            | Error::Grid(_)
            | Error::Io(_) => Self::usage(e.to_string()),
            other => Self::numerical(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::numerical(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}
