use thiserror::Error;

/// Errors raised by the covariance-matrix toolkit and the protocol pipelines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A numerical routine met input it cannot handle, usually an unphysical matrix.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    /// Two independent routes to the same quantity disagree.
    #[error("consistency failure: {0}")]
    ConsistencyFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
