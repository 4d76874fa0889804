//! Dense linear algebra and normal-distribution kernels.

mod matrix;
mod normal;

pub use matrix::{cholesky, dot, row_sums_inverse, solve_spd, CholeskyFactor, Matrix};
pub use normal::{
    erf, erfc, log_std_normal_cdf, std_normal_cdf, std_normal_pdf, std_normal_quantile,
    LOG_TAIL_SWITCH,
};

use crate::scalar::Real;

/// A positive quantity carried together with its logarithm, so that values
/// far below the floating-point range stay meaningful through `log`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue<T> {
    /// Linear value; `0` when it underflows.
    pub value: T,
    pub log: T,
}

impl<T: Real> LogValue<T> {
    pub fn from_log(log: T) -> Self {
        Self {
            value: log.exp(),
            log,
        }
    }

    pub fn from_value(value: T) -> Self {
        Self {
            value,
            log: value.ln(),
        }
    }
}
