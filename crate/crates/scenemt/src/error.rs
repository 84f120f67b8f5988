use std::path::PathBuf;

use scenemt_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Input {
        path: PathBuf,
        #[source]
        source: CoreError,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn input(path: impl Into<PathBuf>, source: CoreError) -> Self {
        CliError::Input {
            path: path.into(),
            source,
        }
    }

    fn core(&self) -> Option<&CoreError> {
        match self {
            CliError::Input { source, .. } | CliError::Core(source) => Some(source),
            _ => None,
        }
    }

    /// 2 for usage and configuration mistakes, 4 for numeric failure,
    /// 3 for everything wrong with the inputs.
    pub fn exit_code(&self) -> i32 {
        match (self, self.core()) {
            (CliError::Usage(_), _) | (_, Some(CoreError::Config(_))) => 2,
            (_, Some(CoreError::NonFinite { .. })) => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
