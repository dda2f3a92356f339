use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
    /// Coefficient requested beyond the known truncation order.
    #[error("coefficient of degree {requested} is beyond truncation order {order}")]
    Truncated { requested: i64, order: i64 },
    /// A computation was refused because it would exceed a configured budget.
    #[error("resource guard: {0}")]
    ResourceGuard(String),
    /// An internal identity or structural expectation failed to hold.
    #[error("consistency failure: {0}")]
    Consistency(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
