//! Crate-wide error type.

/// Errors surfaced by the toolkit.
///
/// `Domain` covers violated mathematical preconditions, `Validation` covers
/// malformed configuration or input files, and `Numerical` covers solver or
/// quadrature failures.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code convention: 2 for validation/domain problems,
    /// 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Validation(_) | Error::Io(_) => 2,
            Error::Numerical(_) => 3,
        }
    }
}
