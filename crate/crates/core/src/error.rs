use thiserror::Error;

/// Errors raised by map construction, analysis and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// The map (or a user-supplied branch) violates the class invariants.
    #[error("invalid map: {0}")]
    InvalidMap(String),
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical routine failed to converge or produced non-finite values.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// A combinatorial or memory cap was exceeded.
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    /// A JSON spec could not be parsed or validated.
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidMap(_) | Error::Domain(_) | Error::Spec(_) | Error::Io(_) => 2,
            Error::Numeric(_) => 3,
            Error::ResourceCap(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
