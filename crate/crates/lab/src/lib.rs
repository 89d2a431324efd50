//! Library behind the `cohomolab` binary.

pub mod checks;
pub mod cli;
pub mod commands;
pub mod setup;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    /// Bad flags, missing files, malformed inputs.
    #[error("{0}")]
    Input(String),
    /// A representation or deformation failed validation.
    #[error("{0}")]
    Verification(String),
    /// A check or assertion failed.
    #[error("{0}")]
    Failed(String),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Input(_) => 2,
            LabError::Verification(_) => 3,
            LabError::Failed(_) => 1,
        }
    }
}

pub fn run(cli: &cli::Cli) -> Result<(), LabError> {
    let settings = cli::Settings::resolve(cli)?;
    if let Some(out) = &settings.out {
        std::fs::create_dir_all(out).map_err(|e| LabError::Input(format!("{}: {e}", out.display())))?;
    }
    match &cli.command {
        cli::Command::Cohomology => commands::cohomology(&settings),
        cli::Command::Sweep(_) => commands::sweep(&settings),
        cli::Command::Scaling(_) => commands::scaling(&settings),
        cli::Command::Verify(_) => commands::verify(&settings),
        cli::Command::Weil => commands::weil(&settings),
    }
}
