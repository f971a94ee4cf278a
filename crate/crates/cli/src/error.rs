use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {field}: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Compute(#[from] cellcov::Error),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("{0}")]
    Serialization(String),

    #[error("validation failed: {0}")]
    ValidationFailed(String),
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 for bad input, 3 for a failed validation,
    /// 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            CliError::ValidationFailed(_) => 3,
            _ => 1,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Serialization(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Serialization(e.to_string())
    }
}

/// Turns a parameter error from the library into a field-level config error.
pub(crate) fn as_config_error(e: cellcov::Error) -> CliError {
    match e {
        cellcov::Error::InvalidParameter { name, reason } => CliError::config(name, reason),
        cellcov::Error::WindowTooSmall { side, required } => {
            CliError::config("side", format!("{side} m is below the required {required} m"))
        }
        other => CliError::Compute(other),
    }
}
