//! Error taxonomy shared by all modules.

use thiserror::Error;

/// Errors produced by the laboratory operations.
///
/// `Config` marks an inconsistent setup (mismatched table, out-of-range
/// parameter), `Contract` a violated precondition, `Budget` a request that
/// exceeds the stated enumeration or memory budget, and `Degenerate` an
/// input on which the requested statistic is undefined.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("grid of {m} points aliases frequencies up to {max_freq}; need m > max frequency")]
    Aliasing { m: u64, max_freq: u64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
