use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A run parameter is inconsistent with the problem (grid too small, cap exceeded, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A configuration key failed validation.
    #[error("invalid value for `{key}`: {msg}")]
    Validation { key: String, msg: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("argument error: {0}")]
    Argument(String),

    /// A sampled field was queried outside its table.
    #[error("range error: {0}")]
    Range(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(key: &str, msg: impl Into<String>) -> Self {
        Error::Validation {
            key: key.to_string(),
            msg: msg.into(),
        }
    }
}
