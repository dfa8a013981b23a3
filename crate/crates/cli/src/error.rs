use thiserror::Error;

/// Failures grouped by the exit status they map to.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad or missing flags, including a missing seed.
    #[error("{0}")]
    Usage(String),
    #[error("config {path}: {msg}")]
    Config { path: String, msg: String },
    #[error("input {path}: {msg}")]
    Input { path: String, msg: String },
    /// Unknown model or invalid model parameters.
    #[error("{0}")]
    Model(String),
    #[error("output: {0}")]
    Output(String),
    #[error("run failed: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config { .. } => 3,
            CliError::Input { .. } => 4,
            CliError::Model(_) => 5,
            CliError::Output(_) => 6,
            CliError::Runtime(_) => 7,
        }
    }

    pub fn input(path: impl std::fmt::Display, msg: impl std::fmt::Display) -> Self {
        CliError::Input { path: path.to_string(), msg: msg.to_string() }
    }

    pub fn config(path: impl std::fmt::Display, msg: impl std::fmt::Display) -> Self {
        CliError::Config { path: path.to_string(), msg: msg.to_string() }
    }

    pub fn runtime(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
