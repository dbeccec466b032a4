use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    Config { field: &'static str, reason: String },

    #[error("unknown model `{0}` (expected one of example1, example2, example3, example4)")]
    UnknownModel(String),

    #[error("non-finite model value at probe point x = {x}")]
    Probe { x: f64 },

    #[error("path diverged at step {step}")]
    Divergence { step: usize },

    #[error("path {path} (seed {seed:#018x}) diverged at step {step}")]
    EnsembleDivergence { path: usize, seed: u64, step: usize },

    #[error("rung {rung} (eps = {eps}): {source}")]
    Rung {
        rung: usize,
        eps: f64,
        source: Box<Error>,
    },

    #[error("rate fit: {0}")]
    Fit(String),

    #[error("empty input: {0}")]
    Empty(&'static str),
}

/// Coarse classification, used by the command line to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Divergence,
    Statistics,
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config { .. } | Error::UnknownModel(_) | Error::Empty(_) => ErrorKind::Config,
            Error::Probe { .. } | Error::Divergence { .. } | Error::EnsembleDivergence { .. } => {
                ErrorKind::Divergence
            }
            Error::Fit(_) => ErrorKind::Statistics,
            Error::Rung { source, .. } => source.kind(),
        }
    }
}
