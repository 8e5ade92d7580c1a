use thiserror::Error;

/// Errors produced by the numerical kernels and the cycle machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence in {what} after {terms} terms")]
    NoConvergence { what: &'static str, terms: u64 },

    #[error("overflow while evaluating {0}")]
    Overflow(&'static str),

    #[error("quantum numbers out of order: n1 = {n1} > n2 = {n2}")]
    Ordering { n1: i64, n2: i64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("degenerate cycle: {0}")]
    DegenerateCycle(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
