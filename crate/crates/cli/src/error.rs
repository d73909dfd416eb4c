use std::path::PathBuf;

use floquet_core::FloquetError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: FloquetError,
    },
    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn numerical(context: impl Into<String>, source: FloquetError) -> Self {
        CliError::Numerical {
            context: context.into(),
            source,
        }
    }

    /// 1 for usage and configuration problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
