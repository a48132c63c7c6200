use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Point outside the bounding box, undefined extended-real arithmetic, etc.
    #[error("domain error: {0}")]
    Domain(String),

    /// A matching piece produced a value that is not an extended real.
    #[error("specification error in piece {piece}: {message}")]
    Specification { piece: usize, message: String },

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("dimension mismatch: declared dim {declared}, but {found}")]
    DimensionMismatch { declared: usize, found: String },

    #[error("function has no pieces")]
    EmptyPieces,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Every band or level of a sampled limit was empty.
    #[error("no admissible samples: {0}")]
    NoSamples(String),

    /// A grid search found nothing; `best` describes the closest candidate.
    #[error("search failure: {message} (best candidate: {best})")]
    SearchFailure { message: String, best: String },
}
