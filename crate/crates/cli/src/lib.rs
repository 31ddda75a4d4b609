//! Library surface of the `dnlab` command line: config parsing, scenario
//! execution and report serialization, kept separate from `main` so
//! integration tests can drive runs in-process.

pub mod config;
pub mod report;
pub mod scenario;

pub use config::ScenarioConfig;
pub use report::{emit, Format, Report};
pub use scenario::{run_scenario, Command, RunOutput};

/// Errors with process exit codes: 1 check failure, 2 config error,
/// 3 I/O error.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("check failure: {0}")]
    CheckFailure(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] dnlab::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CheckFailure(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            // core errors surfacing here stem from invalid inputs, except
            // I/O which keeps its own code
            CliError::Core(dnlab::Error::Io(_)) => 3,
            CliError::Core(_) => 2,
        }
    }
}
