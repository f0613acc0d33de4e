//! The CLI error channel and the exit-code contract.
//!
//! Exit codes are a stable interface: 0 success, 1 validation failure
//! (bad flags, malformed config or input files, physics constraints
//! violated), 2 numerical failure (a fit that did not converge or hit
//! singular normal equations). Scripts may rely on the distinction.

use std::fmt;

/// A command failure, split by exit code.
#[derive(Debug)]
pub enum CmdError {
    /// Rejected before or while interpreting inputs — exit code 1.
    Validation(String),
    /// Inputs were valid but the numerics failed — exit code 2.
    Numerical(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Validation(_) => 1,
            CmdError::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Validation(msg) | CmdError::Numerical(msg) => f.write_str(msg),
        }
    }
}

impl From<hfslab_core::Error> for CmdError {
    fn from(e: hfslab_core::Error) -> Self {
        match e {
            // The one library error that means "the data was fine but the
            // minimization broke down".
            hfslab_core::Error::SingularNormalEquations(_) => CmdError::Numerical(e.to_string()),
            _ => CmdError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Validation(e.to_string())
    }
}

impl From<serde_json::Error> for CmdError {
    fn from(e: serde_json::Error) -> Self {
        CmdError::Validation(e.to_string())
    }
}

pub type CmdResult<T> = std::result::Result<T, CmdError>;
