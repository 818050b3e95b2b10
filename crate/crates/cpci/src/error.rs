use std::path::PathBuf;

use cpci_core::Method;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] cpci_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    /// A malformed row; `line` is 1-based.
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: u64, message: String },
    #[error("{}: header is not `;`-separated (found `{found}` instead); expected the UCI distribution format", path.display())]
    Delimiter { path: PathBuf, found: char },
    #[error("{}: {message}", path.display())]
    Schema { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: calibration file version {found} is not supported (expected {expected})", path.display())]
    Version { path: PathBuf, found: String, expected: u32 },
    #[error("{}: corrupted calibration file: {message}", path.display())]
    Corrupted { path: PathBuf, message: String },
    #[error("{0}")]
    Data(String),
    #[error("{method} failed on replication {rep}: {source}")]
    Replication { method: Method, rep: u64, source: cpci_core::Error },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
        let path = path.into();
        move |source| Error::Io { path, source }
    }

    pub(crate) fn schema(path: impl Into<PathBuf>, message: impl Into<String>) -> Error {
        Error::Schema { path: path.into(), message: message.into() }
    }

    /// Maps a `csv` error onto [`Error::Parse`] or [`Error::Io`].
    pub(crate) fn from_csv(path: impl Into<PathBuf>, err: csv::Error) -> Error {
        let path = path.into();
        let line = err.position().map_or(0, |p| p.line());
        let message = err.to_string();
        match err.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io { path, source },
            _ => Error::Parse { path, line, message },
        }
    }
}
