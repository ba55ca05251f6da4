use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}: size {len} bytes is not a multiple of the {record_bytes}-byte record size ({} trailing bytes)", path.display(), len % record_bytes)]
    Format {
        path: PathBuf,
        len: u64,
        record_bytes: u64,
    },

    #[error("invalid horizon {0}: must be in 1..={max}", max = crate::trace::MAX_HORIZON)]
    Horizon(usize),

    #[error("buffer of {bytes} bytes holds fewer than 2 records of {record_bytes} bytes")]
    Budget { bytes: usize, record_bytes: usize },

    #[error("label arithmetic overflows u64 (trace {trace}, horizon {horizon})")]
    LabelOverflow { trace: u64, horizon: usize },

    #[error("{}: records out of order at byte offset {offset}", path.display())]
    Unsorted { path: PathBuf, offset: u64 },

    #[error("integrity error at trace {trace}: {detail}")]
    Integrity { trace: u64, detail: String },

    #[error("campaign line {line}, column {column}: {detail}")]
    Parse {
        line: usize,
        column: usize,
        detail: String,
    },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("adapter error during {context}: {detail}")]
    Adapter { context: String, detail: String },

    #[error("probe failed: {0}")]
    Probe(String),

    #[error("fit failed: {0}")]
    Fit(String),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<Path>, source: io::Error) -> Self {
        Error::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    pub(crate) fn integrity(trace: u64, detail: impl Into<String>) -> Self {
        Error::Integrity {
            trace,
            detail: detail.into(),
        }
    }

    /// True for failures caused by the data rather than the environment.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Io { .. })
    }
}

/// Attach a path to an `io::Result`.
pub(crate) trait IoContext<T> {
    fn at(self, path: impl AsRef<Path>) -> Result<T>;
}

impl<T> IoContext<T> for io::Result<T> {
    fn at(self, path: impl AsRef<Path>) -> Result<T> {
        self.map_err(|e| Error::io(path, e))
    }
}
