use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record at line {line}: {message}")]
    MalformedRecord { line: usize, message: String },

    #[error("unknown word: {0}")]
    UnknownWord(String),

    #[error("no edge {tail} -> {head}")]
    MissingEdge { tail: String, head: String },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("power-law fit: {0}")]
    Fit(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("pairwise comparison matrix is inconsistent (CR = {cr:.4} >= 0.1)")]
    InconsistentMatrix { cr: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("undefined result: {0}")]
    Undefined(String),
}

pub type Result<T> = std::result::Result<T, Error>;
