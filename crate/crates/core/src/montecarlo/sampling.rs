//! Chunked, order-deterministic sampling kernels.

use rand::Rng;
use rayon::prelude::*;

use super::rng::RngStream;
use super::stats::{CoMoments, Moments};
use crate::numerics::{dot, CholeskyFactor};
use crate::scalar::Real;

/// Samples per chunk; each chunk draws from its own sub-stream.
pub const CHUNK_SIZE: u64 = 1 << 16;

pub trait Merge {
    fn merge(&mut self, other: &Self);
}

/// Runs `kernel` over `ceil(m / CHUNK_SIZE)` chunks in parallel and merges
/// the partial accumulators in chunk order, so the result depends only on
/// `(m, stream)` and not on the worker count.
pub fn run_chunked<A, F>(m: u64, stream: RngStream, kernel: F) -> A
where
    A: Merge + Send,
    F: Fn(&mut rand_chacha::ChaCha8Rng, u64) -> A + Sync,
{
    let chunks = m.div_ceil(CHUNK_SIZE).max(1);
    let parts: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let n = CHUNK_SIZE.min(m - (c * CHUNK_SIZE).min(m));
            let mut rng = stream.chunk(c).rng();
            kernel(&mut rng, n)
        })
        .collect();
    let mut iter = parts.into_iter();
    let mut acc = iter.next().expect("at least one chunk");
    for part in iter {
        acc.merge(&part);
    }
    acc
}

/// Largest argument for which `exp` is comfortably finite (≈ 700 for
/// `f64`).
#[inline]
pub fn exp_safe_limit<T: Real>() -> T {
    T::max_value().ln() - T::lit(9.78)
}

/// `mean + L ξ` with fresh i.i.d. standard normals `ξ`.
#[inline]
pub fn draw_into<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    mean: &[T],
    chol: &CholeskyFactor<T>,
    xi: &mut [T],
    y: &mut [T],
) {
    for v in xi.iter_mut() {
        *v = T::standard_normal(rng);
    }
    chol.mul_lower_into(xi, y);
    for (yi, &m) in y.iter_mut().zip(mean) {
        *yi = *yi + m;
    }
}

/// `Σ exp(yᵢ) ≤ γ`, decided on the log scale when the linear sum or `γ`
/// would leave the safe exponent range.
#[inline]
pub fn sum_below<T: Real>(y: &[T], log_gamma: T) -> bool {
    let max = y.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
    if max > log_gamma {
        return false;
    }
    let lim = exp_safe_limit::<T>();
    if max <= lim && log_gamma.abs() < lim {
        let s: T = y.iter().map(|v| v.exp()).sum();
        s <= log_gamma.exp()
    } else {
        let s: T = y.iter().map(|&v| (v - max).exp()).sum();
        max + s.ln() <= log_gamma
    }
}

impl<T: Real> Merge for Moments<T> {
    fn merge(&mut self, other: &Self) {
        Moments::merge(self, other)
    }
}

/// Accumulated output of one importance-sampling run under `N(μ+Λ, Σ)`.
///
/// `t = L·1{Σ exp(Yᵢ) ≤ γ}` and `z = L·1{Y_d ≤ log γ}` for the control
/// index `d` (`z ≡ 0` when there is none).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedSummary<T> {
    pub tz: CoMoments<T>,
    /// Moments of `t − z`.
    pub diff: Moments<T>,
    pub t_sq: Moments<T>,
    pub z_sq: Moments<T>,
    /// Moments of `L⁴·1{Y_d ≤ log γ}`.
    pub l4: Moments<T>,
    /// Samples with `Σ exp(Yᵢ) ≤ γ`.
    pub sum_events: u64,
    /// Samples with `Y_d ≤ log γ`.
    pub marginal_events: u64,
    /// Pointwise violations of `0 ≤ t ≤ z`.
    pub order_violations: u64,
    /// Largest log-weight seen on an event sample.
    pub max_log_weight: T,
}

impl<T: Real> PairedSummary<T> {
    pub fn new() -> Self {
        Self {
            tz: CoMoments::new(),
            diff: Moments::new(),
            t_sq: Moments::new(),
            z_sq: Moments::new(),
            l4: Moments::new(),
            sum_events: 0,
            marginal_events: 0,
            order_violations: 0,
            max_log_weight: T::neg_infinity(),
        }
    }

    pub fn count(&self) -> u64 {
        self.tz.count
    }

    /// Any event weight beyond the safe exponent range.
    pub fn weight_overflow(&self) -> bool {
        self.max_log_weight > exp_safe_limit::<T>()
    }
}

impl<T: Real> Default for PairedSummary<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> Merge for PairedSummary<T> {
    fn merge(&mut self, o: &Self) {
        self.tz.merge(&o.tz);
        self.diff.merge(&o.diff);
        self.t_sq.merge(&o.t_sq);
        self.z_sq.merge(&o.z_sq);
        self.l4.merge(&o.l4);
        self.sum_events += o.sum_events;
        self.marginal_events += o.marginal_events;
        self.order_violations += o.order_violations;
        self.max_log_weight = self.max_log_weight.max(o.max_log_weight);
    }
}

/// Precomputed quantities for the importance-sampling kernel.
pub struct IsKernel<'a, T> {
    pub mu: &'a [T],
    pub shifted_mean: Vec<T>,
    pub chol: &'a CholeskyFactor<T>,
    /// `Σ⁻¹ Λ`.
    pub eta: &'a [T],
    pub half_quad: T,
    pub log_gamma: T,
    pub control: Option<usize>,
}

impl<T: Real> IsKernel<'_, T> {
    /// `−ηᵗ(y − μ) + ½ ΛᵗΣ⁻¹Λ`.
    #[inline]
    pub fn log_weight(&self, y: &[T], scratch: &mut [T]) -> T {
        for ((s, &yi), &mi) in scratch.iter_mut().zip(y).zip(self.mu) {
            *s = yi - mi;
        }
        self.half_quad - dot(self.eta, scratch)
    }

    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R, n: u64) -> PairedSummary<T> {
        let dim = self.mu.len();
        let mut xi = vec![T::zero(); dim];
        let mut y = vec![T::zero(); dim];
        let mut scratch = vec![T::zero(); dim];
        let mut acc = PairedSummary::<T>::new();
        let zero = T::zero();
        for _ in 0..n {
            draw_into(rng, &self.shifted_mean, self.chol, &mut xi, &mut y);
            let t_event = sum_below(&y, self.log_gamma);
            let z_event = self.control.is_some_and(|d| y[d] <= self.log_gamma);
            let (t, z, l4) = if t_event || z_event {
                let lw = self.log_weight(&y, &mut scratch);
                acc.max_log_weight = acc.max_log_weight.max(lw);
                let w = lw.exp();
                (
                    if t_event { w } else { zero },
                    if z_event { w } else { zero },
                    if z_event {
                        (lw * T::lit(4.0)).exp()
                    } else {
                        zero
                    },
                )
            } else {
                (zero, zero, zero)
            };
            acc.sum_events += u64::from(t_event);
            acc.marginal_events += u64::from(z_event);
            if self.control.is_some() && !(zero <= t && t <= z) {
                acc.order_violations += 1;
            }
            acc.tz.push(t, z);
            acc.diff.push(t - z);
            acc.t_sq.push(t * t);
            acc.z_sq.push(z * z);
            acc.l4.push(l4);
        }
        acc
    }
}

impl<T: Real> IsKernel<'_, T> {
    /// Moments of `L·1{Σ exp(Yᵢ) ≤ γ}` with `Y` drawn from the nominal
    /// `N(μ, Σ)`; their mean is `E_g[T²]`.
    pub fn nominal_run<R: Rng + ?Sized>(&self, rng: &mut R, n: u64) -> Moments<T> {
        let dim = self.mu.len();
        let mut xi = vec![T::zero(); dim];
        let mut y = vec![T::zero(); dim];
        let mut scratch = vec![T::zero(); dim];
        let mut acc = Moments::new();
        for _ in 0..n {
            draw_into(rng, self.mu, self.chol, &mut xi, &mut y);
            acc.push(if sum_below(&y, self.log_gamma) {
                self.log_weight(&y, &mut scratch).exp()
            } else {
                T::zero()
            });
        }
        acc
    }
}

/// Indicator moments of `Σ exp(Yᵢ) ≤ γ` under `N(mean, Σ)`.
pub fn indicator_run<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    n: u64,
    mean: &[T],
    chol: &CholeskyFactor<T>,
    log_gamma: T,
) -> Moments<T> {
    let dim = mean.len();
    let mut xi = vec![T::zero(); dim];
    let mut y = vec![T::zero(); dim];
    let mut acc = Moments::new();
    for _ in 0..n {
        draw_into(rng, mean, chol, &mut xi, &mut y);
        acc.push(if sum_below(&y, log_gamma) {
            T::one()
        } else {
            T::zero()
        });
    }
    acc
}
