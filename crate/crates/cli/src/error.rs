use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid or missing scenario content; `key` is the dotted path.
    #[error("{key}: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Model(#[from] pmsm_imbalance::Error),

    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },

    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            _ => 3,
        }
    }

    /// Single-line diagnostic, `error: ...`.
    pub fn diagnostic(&self) -> String {
        let text = self.to_string();
        let flat: Vec<&str> = text.split_whitespace().collect();
        format!("error: {}", flat.join(" "))
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
