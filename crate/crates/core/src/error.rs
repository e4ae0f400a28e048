use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// The total jump rate vanishes, so no next state exists.
    #[error("configuration is frozen (total jump rate is zero)")]
    Frozen,
    #[error("precision loss: {0}")]
    Precision(String),
    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),
    #[error("no stationary law: {0}")]
    NoStationaryLaw(String),
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
