use thiserror::Error;

/// Errors raised by sketch construction and evaluation.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SketchError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("level-{level} histogram holds {distinct} distinct elements (cap {cap}); raise t")]
    LevelCapExceeded {
        level: usize,
        distinct: usize,
        cap: usize,
    },
    #[error("unsupported moment order {0} (tabulated up to 8)")]
    UnsupportedOrder(u32),
}

pub type Result<T> = std::result::Result<T, SketchError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(SketchError::InvalidParameter(msg.into()))
}
