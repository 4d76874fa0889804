use crate::error::{Error, Result};
use crate::scalar::Real;

/// Threshold `γ > 0` on the sum of the log-normal components.
///
/// Stored as `log γ`: every formula consumes the logarithm, and
/// thresholds such as `e^{-800}` are not representable linearly.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Threshold<T> {
    log: T,
}

impl<T: Real> Threshold<T> {
    pub fn from_gamma(gamma: T) -> Result<Self> {
        if !(gamma > T::zero()) || !gamma.is_finite() {
            return Err(Error::Domain(format!(
                "threshold must be positive and finite, got {gamma}"
            )));
        }
        Ok(Self { log: gamma.ln() })
    }

    pub fn from_log(log_gamma: T) -> Result<Self> {
        if !log_gamma.is_finite() {
            return Err(Error::Domain(format!(
                "log threshold must be finite, got {log_gamma}"
            )));
        }
        Ok(Self { log: log_gamma })
    }

    #[inline]
    pub fn log(&self) -> T {
        self.log
    }

    /// Linear `γ`; may underflow to zero or overflow to infinity.
    #[inline]
    pub fn gamma(&self) -> T {
        self.log.exp()
    }
}
