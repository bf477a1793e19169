use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A tabular or line-delimited input could not be parsed.
    #[error("parse error in {file} line {line}: {message}")]
    Parse {
        file: String,
        line: u64,
        message: String,
    },

    /// Input parsed but violates a data contract (duplicate ids, dangling
    /// references, missing required fields).
    #[error("validation error: {0}")]
    Validation(String),

    /// An id did not resolve against the registry.
    #[error("unknown {kind} id '{id}'")]
    UnknownId { kind: &'static str, id: String },

    /// A computation has no defined result for the given inputs.
    #[error("computation error: {0}")]
    Computation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A structural invariant the engine itself guarantees was broken.
    #[error("internal invariant breach: {0}")]
    Internal(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            match e.into_kind() {
                csv::ErrorKind::Io(io) => Error::Io(io),
                _ => Error::Internal("csv error misreported as i/o".into()),
            }
        } else {
            Error::Validation(format!("csv: {e}"))
        }
    }
}

impl Error {
    pub fn unknown_id(kind: &'static str, id: impl Into<String>) -> Self {
        Error::UnknownId {
            kind,
            id: id.into(),
        }
    }

    /// Stable machine-readable category, one token.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::UnknownId { .. } => "lookup",
            Error::Computation(_) => "computation",
            Error::Io(_) => "io",
            Error::Internal(_) => "internal",
        }
    }

    /// Process exit status for this error class: 1 for bad input or usage,
    /// 2 for i/o failures, 3 for internal invariant breaches.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 2,
            Error::Internal(_) => 3,
            _ => 1,
        }
    }
}
