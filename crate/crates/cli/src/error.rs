use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("unknown method {name:?}; registered methods: {registered}")]
    UnknownMethod { name: String, registered: String },

    #[error("column {column}: {reason}")]
    Schema { column: String, reason: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] haprtr_core::Error),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code: 1 usage, 2 I/O or malformed input, 3 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io { .. } | Self::Parse { .. } | Self::Schema { .. } => 2,
            Self::Core(haprtr_core::Error::NumericFailure { .. }) => 3,
            Self::Config { .. } | Self::UnknownMethod { .. } | Self::Usage(_) | Self::Core(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
