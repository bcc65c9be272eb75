use thiserror::Error;

/// Errors raised by the estimation, testing and simulation layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid transformation: {0}")]
    InvalidTransform(String),
    #[error("invalid null distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid p-value input: {0}")]
    InvalidPValues(String),
    #[error("p-value {value} at index {index} is not an atom of its null support")]
    NotInSupport { index: usize, value: f64 },
    #[error("null support {index} is not super-uniform")]
    NotSuperUniform { index: usize },
    #[error("every rescaling constant is zero; the estimator is undefined")]
    AllRescalingZero,
    #[error("invalid estimator spec: {0}")]
    InvalidSpec(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
