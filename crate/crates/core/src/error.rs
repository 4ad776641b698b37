use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("size guard: {0}")]
    TooLarge(String),
    #[error("sector ({0}, {1}) is empty")]
    EmptySector(i64, i64),
    #[error("frozen weights: {0}")]
    Frozen(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no dual path: {0}")]
    NotConnected(String),
    #[error("quadrature did not converge: {0}")]
    Precision(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_)
            | Error::InvalidConfig(_)
            | Error::TooLarge(_)
            | Error::EmptySector(..)
            | Error::Format(_)
            | Error::Io(_) => 2,
            Error::Frozen(_) | Error::Precondition(_) | Error::NotConnected(_) | Error::Precision(_) => 3,
            Error::Invariant(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
