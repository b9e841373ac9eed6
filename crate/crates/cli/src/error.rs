use thiserror::Error;

/// Errors raised by the experiment driver.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },

    #[error("unknown key `{key}` for subcommand `{command}`")]
    UnknownKey { key: String, command: &'static str },

    #[error("key `{key}`: cannot parse `{value}` as {expected}")]
    BadValue { key: String, value: String, expected: &'static str },

    #[error("override `{0}` is not of the form key=value")]
    BadOverride(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Solver(#[from] sglab::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
