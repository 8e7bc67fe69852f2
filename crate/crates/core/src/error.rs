use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("affine image requires a nonzero scale")]
    ZeroScale,

    #[error("sequence not strictly increasing at n={index}: term {prev} followed by {next}")]
    NotIncreasing {
        index: u64,
        prev: String,
        next: String,
    },

    #[error(
        "prime sieve exhausted: term {term} needs a sieve bound of at least {required}, \
         current bound is {limit}"
    )]
    SieveExhausted { term: u64, required: u64, limit: u64 },

    #[error("precision shortfall: {0}")]
    PrecisionShortfall(String),

    #[error("window exceeds materialized depth: {0}")]
    DepthExceeded(String),

    #[error("parse error: {0}")]
    Parse(String),
}
