use alloc::string::String;

use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The brute-force oracle refuses systems whose lcm exceeds its bound.
    #[error("oracle overflow: lcm {lcm} exceeds bound {bound}")]
    OracleOverflow { lcm: String, bound: u64 },

    #[error("lemma precondition violated: {0}")]
    LemmaPrecondition(String),

    /// A reduction lemma produced something that is not a covering. Should never happen.
    #[error("lemma falsified: {0}")]
    LemmaFalsified(String),

    #[error("scan failure at m = {m}: T_m >= 1")]
    ScanFailure { m: u64 },

    #[error("search guard: {size} elements exceeds limit {limit}")]
    SearchGuard { size: usize, limit: usize },

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("malformed record: {0}")]
    Malformed(String),

    #[error("certificate rejected: {0}")]
    Rejected(String),
}

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::error::Error::InvalidArgument(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;
