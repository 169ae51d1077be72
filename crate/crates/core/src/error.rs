use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("unsupported order {order} (maximum is {max})")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid plotting-position constants: {0}")]
    InvalidConstant(String),

    #[error("quadrature did not reach tolerance {tolerance:e} (estimated error {estimate:e})")]
    Quadrature { tolerance: f64, estimate: f64 },

    #[error("exact covariance limited to n <= {max} (got {n})")]
    CostGuard { n: usize, max: usize },

    #[error("degenerate regression design: {0}")]
    DegenerateDesign(String),

    #[error("fitted scale is not positive ({0})")]
    NonPositiveScale(f64),

    #[error("covariance matrix is singular or not positive definite")]
    SingularCovariance,

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("iteration did not converge after {0} steps")]
    NonConvergence(usize),

    #[error("order-statistic mean is zero at rank {0}")]
    ZeroMean(usize),

    #[error("all {0} replicates were discarded")]
    AllDiscarded(usize),

    #[error("observation {value} is not above the threshold {threshold}")]
    ThresholdViolation { value: f64, threshold: f64 },

    #[error("embedded dataset failed its checksum")]
    DatasetCorrupt,

    #[error("sample has zero variance")]
    ZeroVariance,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
