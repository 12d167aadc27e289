//! Process-level error classification. Every failure funnels into one of
//! three buckets so the exit code tells a batch script what went wrong:
//! 2 for configuration/usage problems, 3 for analysis failures (fits that
//! cannot be performed on the data produced), 4 for integration blow-ups.

use std::fmt;
use std::io;

use gauge_dynamics::Error as CoreError;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config file, unwritable output, oversized request.
    Usage(String),
    /// The pipeline ran but the requested fit/summary is not obtainable.
    Analysis(String),
    /// The integrator reported a runaway trajectory.
    Instability(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Analysis(_) => 3,
            CliError::Instability(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Analysis(msg) => write!(f, "analysis error: {msg}"),
            CliError::Instability(msg) => write!(f, "instability: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Instability { .. } => CliError::Instability(e.to_string()),
            CoreError::Analysis(_) => CliError::Analysis(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Usage(format!("i/o: {e}"))
    }
}

/// Re-tag any underlying error as an analysis failure. Used at the fit
/// stage of a command, where even an invalid-input report from the fit
/// routines means "the produced data cannot be fit", not "the user typed
/// a bad flag".
pub fn analysis_stage<E: fmt::Display>(e: E) -> CliError {
    CliError::Analysis(e.to_string())
}

pub type CliResult<T> = Result<T, CliError>;
