use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}, col {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    /// Malformed schema or transformation spec.
    #[error("schema error: {0}")]
    Schema(String),
    /// Data that does not fit the schema (arity, unknown relation).
    #[error("data error: {0}")]
    Data(String),
    /// An instance violating an FD or IND.
    #[error("constraint violation: {0}")]
    Constraint(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }

    /// True for errors caused by the data rather than by configuration.
    pub fn is_data(&self) -> bool {
        matches!(self, Error::Data(_) | Error::Constraint(_))
    }
}
