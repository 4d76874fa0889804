//! Closed-form moments of the control variable under the dominant tilt.
//!
//! All three are evaluated on the log scale: at small thresholds they are
//! products like `e^{36}·Φ(−12)` whose linear factors under/overflow.

use crate::error::{Error, Result};
use crate::model::{DominanceReport, Problem};
use crate::numerics::{log_std_normal_cdf, LogValue};
use crate::scalar::Real;
use crate::shift::ShiftPlan;
use crate::threshold::Threshold;

/// Standardized distance `(log γ − μ_i)/√Σ_ii` of the threshold from the
/// dominant component's mean.
fn standardized<T: Real>(p: &Problem<T>, i: usize, threshold: Threshold<T>) -> T {
    (threshold.log() - p.mu()[i]) / p.sigma()[(i, i)].sqrt()
}

fn dominant_plan_index<T: Real>(plan: &ShiftPlan<T>, report: &DominanceReport<T>) -> Result<usize> {
    let i = report.dominant()?;
    match plan.dominant_index() {
        Some(j) if j == i => Ok(i),
        _ => Err(Error::AssumptionViolated),
    }
}

/// Known mean of the control variable:
/// `P(γ) = P_f(exp(Y_i) ≤ γ) = Φ((log γ − μ_i)/√Σ_ii)`.
pub fn control_variate_mean<T: Real>(
    p: &Problem<T>,
    report: &DominanceReport<T>,
    threshold: Threshold<T>,
) -> Result<LogValue<T>> {
    let i = report.dominant()?;
    Ok(LogValue::from_log(log_std_normal_cdf(standardized(
        p, i, threshold,
    ))))
}

/// `E_g[Z²] = exp(ΛᵗΣ⁻¹Λ)·Φ(2(log γ − μ_i)/√Σ_ii)` at the plan's threshold.
pub fn z_second_moment_closed_form<T: Real>(
    p: &Problem<T>,
    plan: &ShiftPlan<T>,
    report: &DominanceReport<T>,
) -> Result<LogValue<T>> {
    let i = dominant_plan_index(plan, report)?;
    let x = standardized(p, i, plan.threshold);
    Ok(LogValue::from_log(
        plan.quad + log_std_normal_cdf(x * T::lit(2.0)),
    ))
}

/// `E_g[L⁴·1{exp(Y_i) ≤ γ}] = exp(6ΛᵗΣ⁻¹Λ)·Φ(4(log γ − μ_i)/√Σ_ii)`.
pub fn l4_indicator_closed_form<T: Real>(
    p: &Problem<T>,
    plan: &ShiftPlan<T>,
    report: &DominanceReport<T>,
) -> Result<LogValue<T>> {
    let i = dominant_plan_index(plan, report)?;
    let x = standardized(p, i, plan.threshold);
    Ok(LogValue::from_log(
        plan.quad * T::lit(6.0) + log_std_normal_cdf(x * T::lit(4.0)),
    ))
}
