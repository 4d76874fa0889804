//! Samplers, likelihood ratios and the three estimators of
//! `α(γ) = P(Σ exp(Yᵢ) ≤ γ)`:
//!
//! * naive Monte Carlo under `f = N(μ, Σ)`,
//! * mean-shift importance sampling `T = L·1{Σ exp(Yᵢ) ≤ γ}` under
//!   `g = N(μ + Λ, Σ)`,
//! * importance sampling with the control variate
//!   `Z = L·1{exp(Y_i) ≤ γ}` for the dominant component `i`:
//!   `T′ = T + β(Z − P(γ))`.
//!
//! Runs are split into chunks of [`CHUNK_SIZE`] samples, each with its own
//! sub-stream of the caller's [`RngStream`], and the partial moments are
//! merged in chunk order. Results depend only on `(inputs, stream)`.

mod closed_form;
mod rng;
mod sampling;
mod stats;

use std::fmt;

pub use closed_form::{
    control_variate_mean, l4_indicator_closed_form, z_second_moment_closed_form,
};
pub use rng::{hash64, RngStream, RNG_FAMILY};
pub use sampling::{exp_safe_limit, run_chunked, sum_below, Merge, PairedSummary, CHUNK_SIZE};
pub use stats::{CoMoments, Moments};

use crate::error::{Error, Result};
use crate::metrics::{confidence_interval, correlation_from_moments};
use crate::model::{DominanceReport, Problem};
use crate::numerics::{dot, CholeskyFactor};
use crate::scalar::Real;
use crate::shift::ShiftPlan;
use crate::threshold::Threshold;
use sampling::{indicator_run, IsKernel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorTag {
    Naive,
    Is,
    IsCvBetaStar,
    IsCvFixed,
}

impl EstimatorTag {
    pub const ALL: [EstimatorTag; 4] = [
        EstimatorTag::Naive,
        EstimatorTag::Is,
        EstimatorTag::IsCvBetaStar,
        EstimatorTag::IsCvFixed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorTag::Naive => "naive",
            EstimatorTag::Is => "is",
            EstimatorTag::IsCvBetaStar => "is-cv-beta-star",
            EstimatorTag::IsCvFixed => "is-cv-fixed",
        }
    }

    /// Stable code mixed into stream ids.
    pub fn code(self) -> u64 {
        match self {
            EstimatorTag::Naive => 1,
            EstimatorTag::Is => 2,
            EstimatorTag::IsCvBetaStar => 3,
            EstimatorTag::IsCvFixed => 4,
        }
    }

    pub fn is_control_variate(self) -> bool {
        matches!(self, EstimatorTag::IsCvBetaStar | EstimatorTag::IsCvFixed)
    }
}

impl fmt::Display for EstimatorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EstimatorTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Domain(format!("unknown estimator `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaMode {
    /// `β̂* = −cov̂(T, Z)/var̂(Z)` from the same batch.
    Estimated,
    /// `β = −1`.
    FixedMinusOne,
}

/// Same-batch statistics of the `(T, Z)` pair behind a control-variate
/// estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedStats<T> {
    pub mean_t: T,
    pub mean_z: T,
    pub var_t: T,
    pub var_z: T,
    pub cov_tz: T,
    /// Known mean `P(γ)` of `Z`.
    pub control_mean: T,
    /// Fraction of samples with `exp(Y_i) ≤ γ` (estimates `P₁`).
    pub p1_hat: T,
    /// Fraction of samples with `Σ exp(Yⱼ) ≤ γ` (estimates `P₂`).
    pub p2_hat: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate<T> {
    pub tag: EstimatorTag,
    pub value: T,
    /// `ln(value)`; `−∞` when the estimate is zero.
    pub log_value: T,
    /// Mean of the squared per-sample terms.
    pub second_moment: T,
    /// Per-sample variance (`M − 1` denominator).
    pub variance: T,
    pub m: u64,
    pub threshold: Threshold<T>,
    pub seed: u64,
    pub stream_id: u64,
    pub beta_used: Option<T>,
    pub rho_hat: Option<T>,
    pub ci95: (T, T),
    pub paired: Option<PairedStats<T>>,
    /// A likelihood weight exceeded the safe exponent range.
    pub weight_overflow: bool,
}

impl<T: Real> Estimate<T> {
    #[allow(clippy::too_many_arguments)]
    fn build(
        tag: EstimatorTag,
        value: T,
        variance: T,
        m: u64,
        threshold: Threshold<T>,
        stream: RngStream,
        probability: bool,
    ) -> Self {
        let variance = variance.max(T::zero());
        let mf = T::lit(m as f64);
        let second_moment = variance * (mf - T::one()) / mf + value * value;
        Self {
            tag,
            value,
            log_value: value.ln(),
            second_moment,
            variance,
            m,
            threshold,
            seed: stream.seed,
            stream_id: stream.stream_id,
            beta_used: None,
            rho_hat: None,
            ci95: confidence_interval(value, variance, m, T::lit(0.95), probability),
            paired: None,
            weight_overflow: false,
        }
    }

    /// Standard error of the point estimate.
    pub fn std_error(&self) -> T {
        (self.variance / T::lit(self.m as f64)).sqrt()
    }
}

fn check_samples(m: u64) -> Result<()> {
    if m < 2 {
        return Err(Error::Domain(format!("need at least 2 samples, got {m}")));
    }
    Ok(())
}

/// Draws `m` vectors from `N(mean, L Lᵗ)`, chunked like the estimators.
pub fn sample_mvn<T: Real>(
    mean: &[T],
    chol: &CholeskyFactor<T>,
    m: u64,
    stream: RngStream,
) -> Result<Vec<Vec<T>>> {
    if mean.len() != chol.dim() {
        return Err(Error::DimensionMismatch {
            expected: chol.dim(),
            found: mean.len(),
        });
    }
    struct Batch<T>(Vec<Vec<T>>);
    impl<T: Clone> Merge for Batch<T> {
        fn merge(&mut self, o: &Self) {
            self.0.extend(o.0.iter().cloned());
        }
    }
    let batch = run_chunked(m, stream, |rng, n| {
        let mut xi = vec![T::zero(); mean.len()];
        Batch(
            (0..n)
                .map(|_| {
                    let mut y = vec![T::zero(); mean.len()];
                    sampling::draw_into(rng, mean, chol, &mut xi, &mut y);
                    y
                })
                .collect(),
        )
    });
    Ok(batch.0)
}

/// `log L(y) = −ΛᵗΣ⁻¹(y − μ) + ½ΛᵗΣ⁻¹Λ`.
pub fn log_likelihood_ratio<T: Real>(p: &Problem<T>, plan: &ShiftPlan<T>, y: &[T]) -> Result<T> {
    p.check_len(y.len())?;
    let centered: Vec<T> = y.iter().zip(p.mu()).map(|(&a, &b)| a - b).collect();
    Ok(plan.quad / T::lit(2.0) - dot(&plan.eta, &centered))
}

/// Probability that `Σ exp(Yᵢ) ≤ γ` for `Y ~ N(μ + offset, Σ)`, estimated
/// by plain sampling.
pub fn indicator_probability<T: Real>(
    p: &Problem<T>,
    offset: &[T],
    threshold: Threshold<T>,
    m: u64,
    stream: RngStream,
) -> Result<Moments<T>> {
    p.check_len(offset.len())?;
    check_samples(m)?;
    let mean: Vec<T> = p.mu().iter().zip(offset).map(|(&a, &b)| a + b).collect();
    let lg = threshold.log();
    Ok(run_chunked(m, stream, |rng, n| {
        indicator_run(rng, n, &mean, p.chol(), lg)
    }))
}

/// Naive Monte Carlo: mean of `1{Σ exp(Yᵢ) ≤ γ}` under `f`.
pub fn naive_mc<T: Real>(
    p: &Problem<T>,
    threshold: Threshold<T>,
    m: u64,
    stream: RngStream,
) -> Result<Estimate<T>> {
    let zeros = vec![T::zero(); p.dim()];
    let acc = indicator_probability(p, &zeros, threshold, m, stream)?;
    Ok(Estimate::build(
        EstimatorTag::Naive,
        acc.mean,
        acc.variance(),
        m,
        threshold,
        stream,
        true,
    ))
}

/// Runs the importance-sampling kernel and returns the raw paired moments.
/// `control` selects the component of the control variable `Z`.
pub fn simulate_paired<T: Real>(
    p: &Problem<T>,
    plan: &ShiftPlan<T>,
    control: Option<usize>,
    m: u64,
    stream: RngStream,
) -> Result<PairedSummary<T>> {
    p.check_len(plan.lambda.len())?;
    check_samples(m)?;
    if let Some(d) = control.filter(|&d| d >= p.dim()) {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: d + 1,
        });
    }
    let kernel = IsKernel {
        mu: p.mu(),
        shifted_mean: p
            .mu()
            .iter()
            .zip(&plan.lambda)
            .map(|(&a, &b)| a + b)
            .collect(),
        chol: p.chol(),
        eta: &plan.eta,
        half_quad: plan.quad / T::lit(2.0),
        log_gamma: plan.threshold.log(),
        control,
    };
    Ok(run_chunked(m, stream, |rng, n| kernel.run(rng, n)))
}

/// Mean-shift importance sampling estimator `T`.
pub fn is_mean_shift<T: Real>(
    p: &Problem<T>,
    plan: &ShiftPlan<T>,
    m: u64,
    stream: RngStream,
) -> Result<Estimate<T>> {
    let s = simulate_paired(p, plan, plan.dominant_index(), m, stream)?;
    let mut e = Estimate::build(
        EstimatorTag::Is,
        s.tz.mean_x,
        s.tz.var_x(),
        m,
        plan.threshold,
        stream,
        true,
    );
    e.second_moment = s.t_sq.mean;
    e.weight_overflow = s.weight_overflow();
    Ok(e)
}

/// `β̂* = −cov̂(t, z)/var̂(z)` over a batch of paired samples.
pub fn estimate_beta_star<T: Real>(samples: &[PairedSample<T>]) -> Result<T> {
    let acc = paired_moments(samples)?;
    beta_from_moments(&acc)
}

fn beta_from_moments<T: Real>(acc: &CoMoments<T>) -> Result<T> {
    let vz = acc.var_y();
    if !(vz > T::zero()) {
        return Err(Error::DegenerateVariance(
            "control variable has zero sample variance",
        ));
    }
    Ok(-acc.cov() / vz)
}

pub(crate) fn paired_moments<T: Real>(samples: &[PairedSample<T>]) -> Result<CoMoments<T>> {
    if samples.len() < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 paired samples, got {}",
            samples.len()
        )));
    }
    let mut acc = CoMoments::new();
    for s in samples {
        acc.push(s.t, s.z);
    }
    Ok(acc)
}

/// One realization of `(T, Z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedSample<T> {
    pub t: T,
    pub z: T,
}

/// Importance sampling with the dominant-component control variate,
/// `T′ = T + β(Z − P(γ))`.
///
/// In `Estimated` mode the reported variance is the plug-in
/// `var̂(T) + 2β̂ cov̂(T,Z) + β̂² var̂(Z)`.
pub fn is_cv<T: Real>(
    p: &Problem<T>,
    plan: &ShiftPlan<T>,
    report: &DominanceReport<T>,
    m: u64,
    stream: RngStream,
    beta_mode: BetaMode,
) -> Result<Estimate<T>> {
    let i = report.dominant()?;
    let s = simulate_paired(p, plan, Some(i), m, stream)?;
    is_cv_from_summary(p, report, plan.threshold, &s, stream, beta_mode)
}

/// Builds the control-variate estimate from an existing run.
pub fn is_cv_from_summary<T: Real>(
    p: &Problem<T>,
    report: &DominanceReport<T>,
    threshold: Threshold<T>,
    s: &PairedSummary<T>,
    stream: RngStream,
    beta_mode: BetaMode,
) -> Result<Estimate<T>> {
    let control_mean = control_variate_mean(p, report, threshold)?.value;
    let m = s.count();
    let tz = &s.tz;
    let rho = correlation_from_moments(tz).ok();
    let (tag, beta, value, variance) = match beta_mode {
        BetaMode::FixedMinusOne => {
            // t − (z − P): variance taken from the directly accumulated t − z
            let value = s.diff.mean + control_mean;
            (EstimatorTag::IsCvFixed, -T::one(), value, s.diff.variance())
        }
        BetaMode::Estimated => {
            let beta = beta_from_moments(tz)?;
            let value = tz.mean_x + beta * (tz.mean_y - control_mean);
            let two = T::lit(2.0);
            let variance = tz.var_x() + two * beta * tz.cov() + beta * beta * tz.var_y();
            (EstimatorTag::IsCvBetaStar, beta, value, variance)
        }
    };
    let mut e = Estimate::build(tag, value, variance, m, threshold, stream, true);
    e.beta_used = Some(beta);
    e.rho_hat = rho;
    e.weight_overflow = s.weight_overflow();
    let mf = T::lit(m as f64);
    e.paired = Some(PairedStats {
        mean_t: tz.mean_x,
        mean_z: tz.mean_y,
        var_t: tz.var_x(),
        var_z: tz.var_y(),
        cov_tz: tz.cov(),
        control_mean,
        p1_hat: T::lit(s.marginal_events as f64) / mf,
        p2_hat: T::lit(s.sum_events as f64) / mf,
    });
    Ok(e)
}

/// Independent estimate of the IS second moment through
/// `E_g[T²] = E_f[L·1{Σ exp(Yᵢ) ≤ γ}]`, sampling the nominal density.
/// Returns `(value, std_error)`.
pub fn is_second_moment_oracle<T: Real>(
    p: &Problem<T>,
    plan: &ShiftPlan<T>,
    m: u64,
    stream: RngStream,
) -> Result<(T, T)> {
    p.check_len(plan.lambda.len())?;
    check_samples(m)?;
    let kernel = IsKernel {
        mu: p.mu(),
        shifted_mean: p.mu().to_vec(),
        chol: p.chol(),
        eta: &plan.eta,
        half_quad: plan.quad / T::lit(2.0),
        log_gamma: plan.threshold.log(),
        control: None,
    };
    let acc = run_chunked(m, stream, |rng, n| kernel.nominal_run(rng, n));
    Ok((acc.mean, acc.std_error()))
}
