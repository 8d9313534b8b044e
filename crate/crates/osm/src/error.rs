use std::io;
use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

/// A line that could not be parsed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Malformed {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("I/O error: {0}")]
    Stream(#[from] io::Error),

    #[error("line {line}: {reason}")]
    Parse { line: u64, reason: String },

    #[error("{} malformed line(s), first at line {}: {}", .0.len(), .0[0].line, .0[0].reason)]
    Malformed(Vec<Malformed>),

    #[error(transparent)]
    Model(#[from] osm_core::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(line: u64, reason: impl Into<String>) -> Self {
        Error::Parse {
            line,
            reason: reason.into(),
        }
    }
}
