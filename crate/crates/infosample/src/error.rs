use std::path::{Path, PathBuf};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid input data or geometry.
    #[error(transparent)]
    Core(#[from] infosample_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// The file exists but is not an acceptable PNG.
    #[error("{}: {message}", path.display())]
    Image { path: PathBuf, message: String },

    /// Malformed IIMP map or manifest.
    #[error("{context}: {message}")]
    Format { context: String, message: String },

    /// Bad flags or job configuration.
    #[error("{0}")]
    Usage(String),

    /// Fast and naive score maps differ.
    #[error("fast and naive score maps differ at anchor {index}: {fast} vs {naive}")]
    OracleMismatch { index: usize, fast: f32, naive: f32 },

    #[error("no PNG images in {}", .0.display())]
    EmptyInput(PathBuf),
}

/// Process exit status for each error class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitKind {
    Usage = 1,
    Data = 2,
    Io = 3,
}

impl Error {
    pub fn kind(&self) -> ExitKind {
        match self {
            Error::Usage(_) => ExitKind::Usage,
            Error::Io { .. } => ExitKind::Io,
            Error::Core(_)
            | Error::Image { .. }
            | Error::Format { .. }
            | Error::OracleMismatch { .. }
            | Error::EmptyInput(_) => ExitKind::Data,
        }
    }

    pub(crate) fn io(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
        move |source| Error::Io { path: path.to_path_buf(), source }
    }

    pub(crate) fn format(context: impl Into<String>, message: impl ToString) -> Error {
        Error::Format { context: context.into(), message: message.to_string() }
    }
}
