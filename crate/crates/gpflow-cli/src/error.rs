use thiserror::Error;

/// Command-level failures, mapped onto process exit codes in `main`.
#[derive(Debug, Error)]
pub enum CliError {
    /// Exit code 2.
    #[error("config error: {0}")]
    Config(String),

    /// Exit code 3.
    #[error("solver failure: {0}")]
    Solver(#[from] gpflow::GpError),

    /// Exit code 3.
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    /// Exit code 4, for subcommands that treat non-convergence as failure.
    #[error("did not converge: {0}")]
    NonConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) | CliError::Io(_) => 3,
            CliError::NonConvergence(_) => 4,
        }
    }
}
