use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("band index {index} out of range 1..={bands}")]
    BandIndex { index: usize, bands: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite sample at {0}")]
    NonFinite(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("non-finite values appeared at iteration {iteration} in {block}")]
    Diverged { iteration: usize, block: &'static str },

    #[error("zero denominator in Fourier solve at frequency index {0}")]
    SingularTransfer(usize),

    #[error("missing header sidecar {0}")]
    MissingHeader(PathBuf),

    #[error("inconsistent header {path}: {reason}")]
    InconsistentHeader { path: PathBuf, reason: String },

    #[error("truncated payload {path}: expected {expected} bytes, found {found}")]
    Truncated {
        path: PathBuf,
        expected: u64,
        found: u64,
    },

    #[error("unknown dtype {0:?}")]
    UnknownDtype(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("nothing to evaluate: {0}")]
    NothingToEvaluate(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    ///
    /// 2 is a configuration problem, 3 a data problem and 4 a numerical
    /// failure inside the solver or the metrics.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) | Error::NothingToEvaluate(_) => 2,
            Error::Shape(_)
            | Error::BandIndex { .. }
            | Error::NonFinite(_)
            | Error::MissingHeader(_)
            | Error::InconsistentHeader { .. }
            | Error::Truncated { .. }
            | Error::UnknownDtype(_)
            | Error::Io { .. } => 3,
            Error::Degenerate(_) | Error::Diverged { .. } | Error::SingularTransfer(_) => 4,
        }
    }
}
