//! Rare-event estimation for the left tail of a sum of correlated lognormals.
//!
//! For `Y ~ N(μ, Σ)` the crate estimates `α(γ) = P(Σ exp(Yᵢ) ≤ γ)` by naive
//! Monte Carlo, mean-shift importance sampling, and importance sampling with
//! a single-component control variate. Everything is generic over the scalar
//! type; the `*64` aliases fix it to `f64`.
//!
//! ```
//! use lntail::{check_assumption_a, fixtures, plan_shift, is_mean_shift, RngStream, Threshold};
//!
//! let p = fixtures::paper_problem::<f64>();
//! let report = check_assumption_a(&p);
//! let th = Threshold::from_log(0.0).unwrap();
//! let plan = plan_shift(&p, &report, th).unwrap();
//! let est = is_mean_shift(&p, &plan, 10_000, RngStream::new(7, 0)).unwrap();
//! assert!(est.value > 0.0 && est.value < 1e-3);
//! ```

// guards are written `!(x > 0)` so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fixtures;
pub mod metrics;
pub mod model;
pub mod montecarlo;
pub mod numerics;
pub mod scalar;
pub mod shift;
pub mod threshold;

pub use error::{Error, Result};
pub use metrics::{
    confidence_interval, correlation, lemma_diagnostics, squared_cv, variance_reduction_ratio,
    EfficiencyRow, LemmaDiagnostics,
};
pub use model::{alpha_asymptotic, check_assumption_a, validate_problem, DominanceReport, Problem};
pub use montecarlo::{
    estimate_beta_star, is_cv, is_mean_shift, naive_mc, BetaMode, Estimate, EstimatorTag,
    PairedSample, RngStream,
};
pub use numerics::{log_std_normal_cdf, std_normal_cdf, LogValue, Matrix};
pub use scalar::Real;
pub use shift::{
    mean_shift_dominant, mean_shift_general, plan_shift, solve_simplex_qp, ShiftMode, ShiftPlan,
};
pub use threshold::Threshold;

pub type Problem64 = Problem<f64>;
pub type Matrix64 = Matrix<f64>;
pub type Threshold64 = Threshold<f64>;
pub type DominanceReport64 = DominanceReport<f64>;
pub type ShiftPlan64 = ShiftPlan<f64>;
pub type Estimate64 = Estimate<f64>;
pub type Problem32 = Problem<f32>;
pub type Estimate32 = Estimate<f32>;
