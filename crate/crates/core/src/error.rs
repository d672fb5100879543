use thiserror::Error;

/// Failure raised by a problem sampler.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("sampler failure: {0}")]
pub struct SampleError(pub String);

impl SampleError {
    pub fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Sampler(#[from] SampleError),
}
