use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("{what} exceeds enumeration cap ({got} > {cap})")]
    CapExceeded { what: &'static str, got: usize, cap: usize },

    #[error("sequential plan does not match the bidder set: {0}")]
    PlanMismatch(String),

    #[error("instance is a {found} instance, expected a {expected} instance")]
    ConstraintMismatch { expected: &'static str, found: &'static str },

    #[error("unknown bidder id {0:?}")]
    UnknownBidder(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
