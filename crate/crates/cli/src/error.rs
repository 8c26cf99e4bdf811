use thiserror::Error;

/// CLI failures that abort the invocation, mapped to the exit-code
/// contract: 0 ok, 2 parse/config, 3 construction failure, 4 bound
/// violation. Construction failures inside a sweep are recorded per run and
/// raise the exit code without aborting.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("normalization error: {0}")]
    Normalization(String),

    #[error("duplicate symbol: {0}")]
    DuplicateSymbol(String),

    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<fairmech::Error> for CliError {
    fn from(e: fairmech::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}
