use thiserror::Error;

/// Errors raised by parameter validation across the crate.
///
/// Every public operation validates its inputs up front; once a call gets
/// past validation it does not fail.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("input is empty")]
    Empty,

    #[error("probability vector is not normalized (sum = {sum})")]
    NotNormalized { sum: f64 },

    #[error("toeplitz seed has {actual} bits, expected {expected}")]
    SeedLength { expected: usize, actual: usize },

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("unsupported source model: {0}")]
    UnsupportedModel(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
