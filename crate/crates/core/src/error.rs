use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("covariance matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("covariance matrix is not positive definite: pivot {pivot} (row/column {pivot}) is {value:e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error(
        "dimension {n} exceeds the exact simplex-QP limit of {max}; use a grid search instead"
    )]
    DimensionTooLarge { n: usize, max: usize },

    #[error("no component dominates the covariance matrix (Assumption A does not hold)")]
    AssumptionViolated,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate variance: {0}")]
    DegenerateVariance(&'static str),

    #[error("degenerate value: {0}")]
    DegenerateValue(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
