use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("rate undefined: {0}")]
    UndefinedRate(String),

    #[error("refusing to enumerate {count} supports (limit {limit})")]
    TooManySupports { count: u128, limit: u128 },

    /// Something that should be unreachable for valid inputs, such as the
    /// scalar root finder failing to converge.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be finite and > 0, got {value}") })
    }
}

pub(crate) fn check_exponent(q: f64) -> Result<()> {
    if q.is_finite() && q > 0.0 && q <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name: "q", reason: format!("must lie in (0, 1], got {q}") })
    }
}
