use alloc::string::String;

/// Errors raised by geometric operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeoError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("curvature bound violated: {0}")]
    Curvature(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("invariant breach: {0}")]
    Invariant(String),
    #[error("maximizer of the differential is not unique: arc [{lo}, {hi}]")]
    NonUniqueMax { lo: f64, hi: f64 },
}

pub type Result<T> = core::result::Result<T, GeoError>;

pub(crate) fn domain(msg: impl Into<String>) -> GeoError {
    GeoError::Domain(msg.into())
}
