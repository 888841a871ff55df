use thiserror::Error;

use crate::scalar::NumericMode;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("constant term of the divisor is zero")]
    ZeroConstantTerm,

    #[error("truncation orders differ: {0} vs {1}")]
    OrderMismatch(usize, usize),

    #[error("derivative vector has length {len}, need at least {needed}")]
    LengthMismatch { len: usize, needed: usize },

    #[error("state spaces differ")]
    SpaceMismatch,

    #[error("numeric modes differ: {0} vs {1}")]
    ModeMismatch(NumericMode, NumericMode),

    #[error("order {order} exceeds the configured maximum {max}")]
    OrderExceeded { order: usize, max: usize },

    #[error("negative intensity {value} at `{label}`")]
    NegativeIntensity { label: String, value: f64 },

    #[error("invalid state space: {0}")]
    InvalidSpace(String),

    #[error("invalid process: {0}")]
    InvalidProcess(String),

    #[error("Leibniz subset sum disagrees with the binomial form at order {0}")]
    LeibnizMismatch(usize),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
