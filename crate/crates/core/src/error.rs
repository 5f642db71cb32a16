use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{file}{}: {message}", line.map(|l| format!(":{l}")).unwrap_or_default())]
    Format { file: String, line: Option<usize>, message: String },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("graph{} is disconnected: components {components:?}", graph.map(|g| format!(" {g}")).unwrap_or_default())]
    Disconnected { graph: Option<usize>, components: Vec<Vec<usize>> },

    #[error("tree does not fit the image profile: {0}")]
    Sizing(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("image cache version {found} is not supported (expected {expected})")]
    CacheVersion { found: u32, expected: u32 },

    #[error("malformed cache: {0}")]
    Cache(String),

    #[error("class {class} has {count} members, fewer than {folds} folds")]
    ClassTooSmall { class: usize, count: usize, folds: usize },

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn format(file: impl Into<String>, line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Format { file: file.into(), line, message: message.into() }
    }
}
