use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("entry convention mismatch: {0}")]
    Convention(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for the size/budget family (mapped to a distinct CLI exit code).
    pub fn is_cap(&self) -> bool {
        matches!(self, Error::SizeLimit(_) | Error::BudgetExceeded(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
