use thiserror::Error;

/// Errors produced by the distribution and inference routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument was outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A distribution or mixture was constructed with invalid parameters.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Two-sided p-values require a null distribution symmetric about zero.
    #[error("two-sided p-values require a null distribution symmetric about 0 ({0})")]
    AsymmetricTwoSided(String),

    /// A numeric precondition of an approximation was violated. The message
    /// lists the failing grid indices.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A requested method does not apply to the given supremum domain.
    #[error("method not applicable: {0}")]
    MethodMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
