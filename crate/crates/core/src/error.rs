use thiserror::Error;

use crate::sdp::SdpStatus;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A limit or ratio that does not exist for the given inputs.
    #[error("divergent quantity: {0}")]
    Divergent(String),

    /// A formula evaluated outside the region where it is defined.
    #[error("outside domain: {0}")]
    Domain(String),

    #[error("solver did not reach optimality (status {status:?}): {detail}")]
    Solver { status: SdpStatus, detail: String },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
