use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),
    #[error("reward out of range: {0}")]
    RewardOutOfRange(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("malformed game file: {0}")]
    Malformed(String),
}
