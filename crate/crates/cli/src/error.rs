//! Failures of a run and their exit codes.

use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_REGIME: i32 = 4;
pub const EXIT_QUADRATURE: i32 = 5;
pub const EXIT_SADDLE: i32 = 6;
pub const EXIT_DOMAIN: i32 = 7;
pub const EXIT_SAMPLING: i32 = 8;
pub const EXIT_IO: i32 = 9;

/// Printed as JSON on stderr when a run fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub error: &'static str,
    pub exit_code: i32,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self { error: "invalid-input", exit_code: EXIT_INVALID, message: message.into() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("error report serializes")
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.error, self.message)
    }
}

impl std::error::Error for CliError {}

impl From<chargequench::Error> for CliError {
    fn from(e: chargequench::Error) -> Self {
        use chargequench::Error as E;
        let (error, exit_code) = match &e {
            E::InvalidInput(_) => ("invalid-input", EXIT_INVALID),
            E::Infeasible { .. } => ("infeasible", EXIT_INFEASIBLE),
            E::Regime(_) => ("regime", EXIT_REGIME),
            E::Unsupported(_) => ("unsupported", EXIT_REGIME),
            E::Quadrature { .. } => ("quadrature", EXIT_QUADRATURE),
            E::SaddleBoundary { .. } => ("saddle-boundary", EXIT_SADDLE),
            E::Domain(_) => ("domain", EXIT_DOMAIN),
            E::Sampling(_) => ("sampling", EXIT_SAMPLING),
        };
        Self { error, exit_code, message: e.to_string() }
    }
}

impl From<chargequench_ed::OracleError> for CliError {
    fn from(e: chargequench_ed::OracleError) -> Self {
        use chargequench_ed::OracleError as E;
        let (error, exit_code) = match &e {
            E::InvalidInput(_) => ("invalid-input", EXIT_INVALID),
            E::ForbiddenOutcome { .. } => ("infeasible", EXIT_INFEASIBLE),
        };
        Self { error, exit_code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self { error: "io", exit_code: EXIT_IO, message: e.to_string() }
    }
}
