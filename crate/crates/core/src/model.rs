//! The simulation problem `Y ~ N(μ, Σ)` and structural facts about its left
//! tail.

use crate::error::{Error, Result};
use crate::numerics::{cholesky, CholeskyFactor, LogValue, Matrix};
use crate::scalar::Real;
use crate::threshold::Threshold;

/// Validated `(μ, Σ)` pair with its cached factorization.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct Problem<T> {
    mu: Vec<T>,
    sigma: Matrix<T>,
    chol: CholeskyFactor<T>,
    sigma_inv: Matrix<T>,
    row_sums: Vec<T>,
}

impl<T: Real> Problem<T> {
    /// Validates `mu` and `sigma` and caches the Cholesky factor, the
    /// inverse and the inverse row sums `A_k = Σⱼ (Σ⁻¹)_{kj}`.
    pub fn new(mu: Vec<T>, sigma: Matrix<T>) -> Result<Self> {
        let n = mu.len();
        if n == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if sigma.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: sigma.dim(),
            });
        }
        if mu.iter().chain(sigma.as_slice()).any(|x| !x.is_finite()) {
            return Err(Error::Domain("non-finite entry in mu or sigma".into()));
        }
        if let Some((row, col)) = sigma.asymmetry(T::tol(1e-12)) {
            return Err(Error::NotSymmetric { row, col });
        }
        let chol = cholesky(&sigma)?;
        let sigma_inv = chol.inverse();
        let row_sums = chol.solve(&vec![T::one(); n]);
        Ok(Self {
            mu,
            sigma,
            chol,
            sigma_inv,
            row_sums,
        })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[T] {
        &self.mu
    }

    pub fn sigma(&self) -> &Matrix<T> {
        &self.sigma
    }

    pub fn chol(&self) -> &CholeskyFactor<T> {
        &self.chol
    }

    pub fn sigma_inv(&self) -> &Matrix<T> {
        &self.sigma_inv
    }

    pub fn row_sums(&self) -> &[T] {
        &self.row_sums
    }

    /// `vᵗ Σ⁻¹ v`.
    pub fn quad_form(&self, v: &[T]) -> Result<T> {
        self.check_len(v.len())?;
        Ok(self.chol.quad_form(v))
    }

    /// `Σ⁻¹ v`.
    pub fn solve(&self, v: &[T]) -> Result<Vec<T>> {
        self.check_len(v.len())?;
        Ok(self.chol.solve(v))
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: len,
            });
        }
        Ok(())
    }
}

/// Free-function form of [`Problem::new`].
pub fn validate_problem<T: Real>(mu: Vec<T>, sigma: Matrix<T>) -> Result<Problem<T>> {
    Problem::new(mu, sigma)
}

/// Verdict on the single-dominant-component condition: some `i` with
/// `Σ_ii < Σ_ij` for every `j ≠ i`.
///
/// Indices are zero-based. `a` and `c` are aligned with `others`, the
/// non-dominant indices in increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport<T> {
    pub holds: bool,
    pub index: Option<usize>,
    /// `min_{j≠i} (Σ_ij − Σ_ii)` for every candidate `i` (`+∞` when `N = 1`).
    pub margins: Vec<T>,
    pub others: Vec<usize>,
    /// `a_k = Σ_{k,i}/Σ_{ii} − 1`.
    pub a: Vec<T>,
    /// `c_k = exp(μ_k − (Σ_{k,i}/Σ_{ii}) μ_i)`.
    pub c: Vec<T>,
}

impl<T: Real> DominanceReport<T> {
    pub fn dominant(&self) -> Result<usize> {
        match (self.holds, self.index) {
            (true, Some(i)) => Ok(i),
            _ => Err(Error::AssumptionViolated),
        }
    }

    /// Index (into the full problem) maximizing `c_k γ^{a_k}`, compared on
    /// the log scale; ties go to the smallest index. `None` when there are
    /// no other components or the assumption fails.
    pub fn i0(&self, threshold: Threshold<T>) -> Option<usize> {
        if !self.holds {
            return None;
        }
        let mut best: Option<(usize, T)> = None;
        for (pos, &k) in self.others.iter().enumerate() {
            let score = self.c[pos].ln() + self.a[pos] * threshold.log();
            match best {
                Some((_, s)) if score <= s => {}
                _ => best = Some((k, score)),
            }
        }
        best.map(|(k, _)| k)
    }

    /// `a_{i0}` at the given threshold.
    pub fn a_i0(&self, threshold: Threshold<T>) -> Option<T> {
        let k = self.i0(threshold)?;
        let pos = self.others.iter().position(|&o| o == k)?;
        Some(self.a[pos])
    }
}

/// Tests for a dominant component. Strictness uses
/// `Σ_ii < Σ_ij − 1e−12·max|Σ|`, so ties report `holds = false`.
pub fn check_assumption_a<T: Real>(p: &Problem<T>) -> DominanceReport<T> {
    let n = p.dim();
    let s = p.sigma();
    let tol = T::tol(1e-12) * s.max_abs();
    let margins: Vec<T> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| s[(i, j)] - s[(i, i)])
                .fold(T::infinity(), T::min)
        })
        .collect();
    let mut index = None;
    for (i, &m) in margins.iter().enumerate() {
        if m > tol {
            index = Some(i);
            break;
        }
    }
    let (others, a, c) = match index {
        Some(i) => {
            let others: Vec<usize> = (0..n).filter(|&k| k != i).collect();
            let ratio = |k: usize| s[(k, i)] / s[(i, i)];
            let a = others.iter().map(|&k| ratio(k) - T::one()).collect();
            let c = others
                .iter()
                .map(|&k| (p.mu()[k] - ratio(k) * p.mu()[i]).exp())
                .collect();
            (others, a, c)
        }
        None => (Vec::new(), Vec::new(), Vec::new()),
    };
    DominanceReport {
        holds: index.is_some(),
        index,
        margins,
        others,
        a,
        c,
    }
}

/// Left-tail equivalent under a dominant component `i`:
/// `√Σ_ii / (√(2π) log(1/γ)) · exp(−(log γ − μ_i)² / (2Σ_ii))`.
///
/// This is a `γ → 0` equivalent only; `γ ≥ 1` is rejected.
pub fn alpha_asymptotic<T: Real>(
    p: &Problem<T>,
    report: &DominanceReport<T>,
    threshold: Threshold<T>,
) -> Result<LogValue<T>> {
    let i = report.dominant()?;
    let lg = threshold.log();
    if lg >= T::zero() {
        return Err(Error::Domain(format!(
            "asymptotic formula needs γ < 1, got log γ = {lg}"
        )));
    }
    let var = p.sigma()[(i, i)];
    let d = lg - p.mu()[i];
    let two = T::lit(2.0);
    let log = var.ln() / two - T::TAU().ln() / two - (-lg).ln() - d * d / (two * var);
    Ok(LogValue::from_log(log))
}
