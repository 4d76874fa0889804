//! Efficiency metrics and trend diagnostics for the estimators.

use crate::error::{Error, Result};
use crate::model::{alpha_asymptotic, DominanceReport, Problem};
use crate::montecarlo::{
    control_variate_mean, l4_indicator_closed_form, paired_moments, simulate_paired,
    z_second_moment_closed_form, CoMoments, Estimate, PairedSample, RngStream,
};
use crate::numerics::std_normal_quantile;
use crate::scalar::Real;
use crate::shift::ShiftPlan;
use crate::threshold::Threshold;

/// Squared coefficient of variation `variance / value²`.
pub fn squared_cv<T: Real>(e: &Estimate<T>) -> Result<T> {
    squared_cv_raw(e.value, e.variance)
}

fn squared_cv_raw<T: Real>(value: T, variance: T) -> Result<T> {
    if value == T::zero() {
        return Err(Error::DegenerateValue(
            "estimate is zero at this sample size",
        ));
    }
    Ok(variance / (value * value))
}

/// Variance-reduction ratio `ξ = var_is / var_iscv`.
pub fn variance_reduction_ratio<T: Real>(var_is: T, var_iscv: T) -> Result<T> {
    if !(var_iscv > T::zero()) {
        return Err(Error::DegenerateValue("control-variate variance is zero"));
    }
    Ok(var_is / var_iscv)
}

/// Pearson correlation of `(t, z)` with `M − 1` conventions, clamped to
/// `[−1, 1]`.
pub fn correlation<T: Real>(samples: &[PairedSample<T>]) -> Result<T> {
    correlation_from_moments(&paired_moments(samples)?)
}

pub fn correlation_from_moments<T: Real>(acc: &CoMoments<T>) -> Result<T> {
    let (vx, vy) = (acc.var_x(), acc.var_y());
    if !(vx > T::zero()) || !(vy > T::zero()) {
        return Err(Error::DegenerateVariance(
            "correlation needs two non-constant samples",
        ));
    }
    let r = acc.cov() / (vx * vy).sqrt();
    Ok(r.max(-T::one()).min(T::one()))
}

/// `value ± z_{(1+level)/2} √(variance/m)`, the lower end floored at zero
/// for probability estimands.
pub fn confidence_interval<T: Real>(
    value: T,
    variance: T,
    m: u64,
    level: T,
    probability: bool,
) -> (T, T) {
    let z = std_normal_quantile((T::one() + level) / T::lit(2.0)).max(T::zero());
    let half = z * (variance.max(T::zero()) / T::lit(m.max(1) as f64)).sqrt();
    let low = value - half;
    let low = if probability { low.max(T::zero()) } else { low };
    (low, value + half)
}

/// Confidence interval of an estimate at an arbitrary level.
pub fn estimate_interval<T: Real>(e: &Estimate<T>, level: T) -> (T, T) {
    confidence_interval(e.value, e.variance, e.m, level, true)
}

/// Per-threshold summary comparing the estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyRow<T> {
    pub threshold: Threshold<T>,
    pub cv2_is: Option<T>,
    pub cv2_iscv_fixed: Option<T>,
    pub cv2_iscv_star: Option<T>,
    pub rho_hat: Option<T>,
    pub beta_hat: Option<T>,
    pub xi_fixed: Option<T>,
    pub xi_star: Option<T>,
    pub p1_minus_p2_hat: Option<T>,
    pub alpha_asymptotic: Option<T>,
    /// `log(second moment) / log(α̂)` of the plain IS estimator; tends to 2
    /// from below for an asymptotically optimal estimator.
    pub is_log_ratio: Option<T>,
}

impl<T: Real> EfficiencyRow<T> {
    /// `ξ` and `ρ̂` use the `(T, Z)` statistics of the same control-variate
    /// batch; `CV²(T)` comes from the IS run when present.
    pub fn from_estimates(
        threshold: Threshold<T>,
        is: Option<&Estimate<T>>,
        fixed: Option<&Estimate<T>>,
        star: Option<&Estimate<T>>,
        alpha_asymptotic: Option<T>,
    ) -> Self {
        let cv2 = |e: Option<&Estimate<T>>| e.and_then(|e| squared_cv(e).ok());
        let xi = |e: Option<&Estimate<T>>| {
            e.and_then(|e| {
                let paired = e.paired.as_ref()?;
                variance_reduction_ratio(paired.var_t, e.variance).ok()
            })
        };
        let paired = star.or(fixed).and_then(|e| e.paired.as_ref());
        let cv2_is =
            cv2(is).or_else(|| paired.and_then(|s| squared_cv_raw(s.mean_t, s.var_t).ok()));
        Self {
            threshold,
            cv2_is,
            cv2_iscv_fixed: cv2(fixed),
            cv2_iscv_star: cv2(star),
            rho_hat: star.or(fixed).and_then(|e| e.rho_hat),
            beta_hat: star.and_then(|e| e.beta_used),
            xi_fixed: xi(fixed),
            xi_star: xi(star),
            p1_minus_p2_hat: paired.map(|s| s.p1_hat - s.p2_hat),
            alpha_asymptotic,
            is_log_ratio: is.and_then(|e| {
                (e.value > T::zero() && e.value < T::one())
                    .then(|| e.second_moment.ln() / e.value.ln())
            }),
        }
    }
}

/// Monte Carlo probes of the two lemma bounds behind the vanishing-relative-
/// error result, at one threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaDiagnostics<T> {
    pub threshold: Threshold<T>,
    pub m: u64,
    /// `P_g(exp(Y_i) ≤ γ)`, exactly `1/2` under the dominant tilt.
    pub p1_hat: T,
    pub p1_within_3se: bool,
    pub p2_hat: T,
    /// `P_g(exp(Y_i) ≤ γ, Σ exp(Yⱼ) > γ)`.
    pub p1_minus_p2_hat: T,
    /// Number of samples in the `P₁ − P₂` event.
    pub discrepancy_events: u64,
    /// Fewer than 100 discrepancy events: the rate estimates are noisy.
    pub low_count: bool,
    /// Closed-form mean `P(γ)` of the control variable.
    pub control_mean: T,
    pub z2_empirical: T,
    pub z2_std_error: T,
    pub z2_closed_form: T,
    pub t2_empirical: T,
    pub l4_empirical: T,
    pub l4_std_error: T,
    pub l4_closed_form: T,
    /// `(E[Z²] − E[T²]) / E[Z²]`, empirical.
    pub lemma1_lhs: T,
    /// `√log(1/γ) · √(P₁ − P₂)`.
    pub lemma1_rate: T,
    /// `a_{i0}` at this threshold.
    pub a_i0: Option<T>,
    /// `log((P₁ − P₂) / γ^{a_{i0}})`.
    pub lemma2_log_ratio: Option<T>,
    /// `|quad_form(Λ) − ΛᵗΣ⁻¹Λ| / ΛᵗΣ⁻¹Λ`.
    pub quad_identity_error: T,
    pub order_violations: u64,
    /// Plain IS estimate `mean(T)` from the same batch.
    pub alpha_hat_is: T,
    /// IS-CV estimate with `β = −1` from the same batch.
    pub alpha_hat_iscv: T,
    pub alpha_asymptotic: Option<T>,
}

impl<T: Real> LemmaDiagnostics<T> {
    /// `α̂_ISCV / α_asymptotic`.
    pub fn asymptotic_ratio(&self) -> Option<T> {
        self.alpha_asymptotic.map(|a| self.alpha_hat_iscv / a)
    }
}

impl<T: Real> LemmaDiagnostics<T> {
    /// Lemma-1 constant implied at this threshold, `lhs / rate`.
    pub fn lemma1_constant(&self) -> Option<T> {
        (self.lemma1_rate > T::zero()).then(|| self.lemma1_lhs / self.lemma1_rate)
    }
}

pub fn lemma_diagnostics<T: Real>(
    p: &Problem<T>,
    plan: &ShiftPlan<T>,
    report: &DominanceReport<T>,
    m: u64,
    stream: RngStream,
) -> Result<LemmaDiagnostics<T>> {
    let i = report.dominant()?;
    let control_mean = control_variate_mean(p, report, plan.threshold)?.value;
    let alpha_asym = alpha_asymptotic(p, report, plan.threshold)
        .ok()
        .map(|v| v.value);
    let z2_closed = z_second_moment_closed_form(p, plan, report)?;
    let l4_closed = l4_indicator_closed_form(p, plan, report)?;
    let s = simulate_paired(p, plan, Some(i), m, stream)?;
    let mf = T::lit(m as f64);
    let p1 = T::lit(s.marginal_events as f64) / mf;
    let p2 = T::lit(s.sum_events as f64) / mf;
    let discrepancy = s.marginal_events - s.sum_events;
    let diff = T::lit(discrepancy as f64) / mf;
    let half = T::lit(0.5);
    let p1_se = (T::lit(0.25) / mf).sqrt();
    let lg = plan.threshold.log();
    let z2 = s.z_sq.mean;
    let lemma1_lhs = if z2 > T::zero() {
        (z2 - s.t_sq.mean) / z2
    } else {
        T::nan()
    };
    let lemma1_rate = (-lg).sqrt() * diff.sqrt();
    let a_i0 = report.a_i0(plan.threshold);
    let lemma2_log_ratio = a_i0.map(|a| diff.ln() - a * lg);
    let q = p.quad_form(&plan.lambda)?;
    let quad_identity_error = if plan.quad > T::zero() {
        (q - plan.quad).abs() / plan.quad
    } else {
        q.abs()
    };
    Ok(LemmaDiagnostics {
        threshold: plan.threshold,
        m,
        p1_hat: p1,
        p1_within_3se: (p1 - half).abs() <= T::lit(3.0) * p1_se,
        p2_hat: p2,
        p1_minus_p2_hat: diff,
        discrepancy_events: discrepancy,
        low_count: discrepancy < 100,
        control_mean,
        z2_empirical: z2,
        z2_std_error: s.z_sq.std_error(),
        z2_closed_form: z2_closed.value,
        t2_empirical: s.t_sq.mean,
        l4_empirical: s.l4.mean,
        l4_std_error: s.l4.std_error(),
        l4_closed_form: l4_closed.value,
        lemma1_lhs,
        lemma1_rate,
        a_i0,
        lemma2_log_ratio,
        quad_identity_error,
        order_violations: s.order_violations,
        alpha_hat_is: s.tz.mean_x,
        alpha_hat_iscv: s.diff.mean + control_mean,
        alpha_asymptotic: alpha_asym,
    })
}

/// `max / min` of `(P₁ − P₂)/γ^{a_{i0}}` over a grid; `None` if any point is
/// missing or has no discrepancy events.
pub fn lemma2_spread<T: Real>(diags: &[LemmaDiagnostics<T>]) -> Option<T> {
    let logs: Option<Vec<T>> = diags
        .iter()
        .map(|d| d.lemma2_log_ratio.filter(|v| v.is_finite()))
        .collect();
    let logs = logs?;
    let max = logs.iter().copied().fold(T::neg_infinity(), T::max);
    let min = logs.iter().copied().fold(T::infinity(), T::min);
    Some((max - min).exp())
}

/// Least-squares line `y = slope·x + intercept` with its `R²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit<T> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
}

pub fn linear_fit<T: Real>(xs: &[T], ys: &[T]) -> Result<LinearFit<T>> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    let mut acc = CoMoments::new();
    for (&x, &y) in xs.iter().zip(ys) {
        acc.push(x, y);
    }
    let vx = acc.var_x();
    if !(vx > T::zero()) {
        return Err(Error::DegenerateVariance("regressor is constant"));
    }
    let slope = acc.cov() / vx;
    let vy = acc.var_y();
    let r_squared = if vy > T::zero() {
        acc.cov() * acc.cov() / (vx * vy)
    } else {
        T::one()
    };
    Ok(LinearFit {
        slope,
        intercept: acc.mean_y - slope * acc.mean_x,
        r_squared,
    })
}

fn ranks<T: Real>(v: &[T]) -> Vec<T> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut ranks = vec![T::zero(); v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        // average rank for ties, 1-based
        let r = T::lit((i + j) as f64 / 2.0 + 1.0);
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation.
pub fn spearman<T: Real>(xs: &[T], ys: &[T]) -> Result<T> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    let mut acc = CoMoments::new();
    for (x, y) in ranks(xs).into_iter().zip(ranks(ys)) {
        acc.push(x, y);
    }
    correlation_from_moments(&acc)
}

/// `true` when the last `k` values are strictly decreasing.
pub fn strictly_decreasing_tail<T: Real>(values: &[T], k: usize) -> bool {
    if k == 0 || values.len() < k {
        return false;
    }
    values[values.len() - k..].windows(2).all(|w| w[1] < w[0])
}
