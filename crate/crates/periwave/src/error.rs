use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum PwError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("did not converge: {0}")]
    Convergence(String),
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl PwError {
    pub fn config(key: &str, message: impl Into<String>) -> Self {
        PwError::Config {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, PwError>;
