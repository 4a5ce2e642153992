use std::path::PathBuf;

pub type Result<T, E = VlaweError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum VlaweError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: line {line}: {message}", path.display())]
    Line {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] vlawe_core::Error),

    #[error("{0}")]
    Usage(String),
}

impl VlaweError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Self::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit status: 1 for usage errors, 2 for everything caused by
    /// the input data or files.
    pub fn exit_code(&self) -> u8 {
        match self {
            VlaweError::Usage(_) => 1,
            _ => 2,
        }
    }
}
