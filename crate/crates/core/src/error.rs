use std::path::PathBuf;

/// Errors raised by the alignment toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input file; `line` is 1-based.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("language mismatch: {left} vs {right}")]
    LanguageMismatch { left: String, right: String },

    #[error("unknown language `{0}`")]
    UnknownLanguage(String),

    #[error("seed dictionary is empty")]
    EmptySeed,

    /// Self-learning produced no mutual nearest neighbours.
    #[error("induced dictionary is empty at iteration {iteration}")]
    EmptyInducedDictionary { iteration: usize },

    #[error("singular value decomposition failed")]
    SvdFailure,

    #[error("alignment of `{language}` failed: {source}")]
    Language {
        language: String,
        #[source]
        source: Box<Error>,
    },

    /// Correlation or statistic undefined for the given data.
    #[error("undefined: {0}")]
    Undefined(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    /// True for failures of the iterative alignment itself, as opposed to bad input.
    pub fn is_convergence_failure(&self) -> bool {
        match self {
            Error::EmptyInducedDictionary { .. } | Error::SvdFailure => true,
            Error::Language { source, .. } => source.is_convergence_failure(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
