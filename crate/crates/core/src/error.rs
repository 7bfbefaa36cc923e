use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The prime table does not reach far enough for the requested work.
    #[error("prime table limit {limit} is insufficient (needs {needed})")]
    InsufficientTable { needed: u64, limit: u64 },

    #[error("empty sample: summary has no eligible integers")]
    EmptySample,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
