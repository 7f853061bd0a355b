//! IO, configuration, and verification layers around `qbdrive-core`:
//! the rotating-field benchmark runner, CSV/SVG emission, and the
//! self-check suites behind `qbdrive verify`.

use std::fmt;

pub mod config;
pub mod csvio;
pub mod experiment;
pub mod svg;
pub mod verify;

/// Errors mapped onto the process exit codes: validation failures exit 1,
/// numerical failures 2, verification failures 3.
#[derive(Debug, Clone)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Verification { failed: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 1,
            Self::Numerical(_) => 2,
            Self::Verification { .. } => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Validation(msg) => write!(f, "invalid input: {msg}"),
            Self::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            Self::Verification { failed } => write!(f, "{failed} verification check(s) failed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Validation(format!("io: {e}"))
    }
}

impl From<qbdrive_core::dynamics::DynamicsError> for CliError {
    fn from(e: qbdrive_core::dynamics::DynamicsError) -> Self {
        Self::Numerical(e.to_string())
    }
}

impl From<qbdrive_core::driving::DrivingError> for CliError {
    fn from(e: qbdrive_core::driving::DrivingError) -> Self {
        Self::Numerical(e.to_string())
    }
}

impl From<qbdrive_core::stability::StabilityError> for CliError {
    fn from(e: qbdrive_core::stability::StabilityError) -> Self {
        Self::Numerical(e.to_string())
    }
}

impl From<qbdrive_core::qb::QbError> for CliError {
    fn from(e: qbdrive_core::qb::QbError) -> Self {
        Self::Numerical(e.to_string())
    }
}
