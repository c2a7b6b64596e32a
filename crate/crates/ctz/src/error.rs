use std::io;
use std::path::PathBuf;

pub type Result<T, E = CtzError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CtzError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("corrupt stream: {0}")]
    Corrupt(String),

    #[error(transparent)]
    Core(#[from] ctz_core::Error),

    #[error("{0}")]
    Usage(String),
}

impl CtzError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CtzError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for I/O, 4 for corrupt input streams, 3 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CtzError::Io { .. } => 2,
            CtzError::Corrupt(_) => 4,
            CtzError::Core(ctz_core::Error::DecodeFailure { .. } | ctz_core::Error::Format(_)) => 4,
            CtzError::Core(_) | CtzError::Usage(_) => 3,
        }
    }
}
