//! Mean-shift tilt for the importance-sampling density.
//!
//! The general tilt needs the minimizer of `wᵗΣw` over the probability
//! simplex and the system reduced to its support. Under a dominant component
//! the tilt collapses to a closed form.

use crate::error::{Error, Result};
use crate::model::{DominanceReport, Problem};
use crate::numerics::{cholesky, dot, Matrix};
use crate::scalar::Real;
use crate::threshold::Threshold;

/// Largest dimension accepted by the exact support enumeration.
pub const MAX_QP_DIM: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexQpSolution<T> {
    pub w_bar: Vec<T>,
    /// `w̄ᵗ Σ w̄`.
    pub value: T,
    /// Indices with `w̄_k > 0`, increasing.
    pub support: Vec<usize>,
}

impl<T> SimplexQpSolution<T> {
    pub fn n_bar(&self) -> usize {
        self.support.len()
    }
}

/// Global minimizer of `wᵗΣw` over the probability simplex.
///
/// For every nonempty support `S` the equality-constrained optimum is
/// `w_S = Σ_S⁻¹1 / (1ᵗΣ_S⁻¹1)` with objective `1 / (1ᵗΣ_S⁻¹1)`. The
/// minimizer's own support always yields a feasible candidate, so the best
/// feasible candidate is the global optimum of this strictly convex problem.
pub fn solve_simplex_qp<T: Real>(sigma: &Matrix<T>) -> Result<SimplexQpSolution<T>> {
    let n = sigma.dim();
    if n == 0 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: 0,
        });
    }
    if n > MAX_QP_DIM {
        return Err(Error::DimensionTooLarge { n, max: MAX_QP_DIM });
    }
    // Fails fast on a non-PD input; every principal submatrix of a PD matrix
    // is PD.
    cholesky(sigma)?;

    let feas_tol = T::tol(1e-12);
    let mut best: Option<(T, Vec<usize>, Vec<T>)> = None;
    let mut idx = Vec::with_capacity(n);
    for mask in 1u32..(1u32 << n) {
        idx.clear();
        idx.extend((0..n).filter(|&k| mask & (1 << k) != 0));
        let sub = sigma.principal_submatrix(&idx);
        let chol = cholesky(&sub).expect("principal submatrix of a PD matrix");
        let x = chol.solve(&vec![T::one(); idx.len()]);
        let total: T = x.iter().copied().sum();
        if !(total > T::zero()) {
            continue;
        }
        let w: Vec<T> = x.iter().map(|&v| v / total).collect();
        if w.iter().any(|&v| v < -feas_tol) {
            continue;
        }
        let value = total.recip();
        let better = match &best {
            None => true,
            Some((v, _, _)) => value < *v,
        };
        if better {
            best = Some((value, idx.clone(), w));
        }
    }
    let (_, idx, w) = best.expect("singleton supports are always feasible");
    let mut w_bar = vec![T::zero(); n];
    let mut support = Vec::with_capacity(idx.len());
    for (&k, &v) in idx.iter().zip(&w) {
        if v > feas_tol {
            w_bar[k] = v;
            support.push(k);
        }
    }
    let total: T = w_bar.iter().copied().sum();
    w_bar.iter_mut().for_each(|v| *v = *v / total);
    let value = dot(&w_bar, &sigma.mul_vec(&w_bar));
    Ok(SimplexQpSolution {
        w_bar,
        value,
        support,
    })
}

/// `(μ̄, Σ̄, Σ̄⁻¹, Ā)` restricted to the support of the simplex minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSystem<T> {
    pub support: Vec<usize>,
    pub mu_bar: Vec<T>,
    pub sigma_bar: Matrix<T>,
    pub sigma_bar_inv: Matrix<T>,
    /// Row sums of `Σ̄⁻¹`.
    pub a_bar: Vec<T>,
}

pub fn reduce<T: Real>(p: &Problem<T>, sol: &SimplexQpSolution<T>) -> Result<ReducedSystem<T>> {
    if sol.support.is_empty() {
        return Err(Error::Domain("empty simplex support".into()));
    }
    if let Some(&k) = sol.support.iter().find(|&&k| k >= p.dim()) {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: k + 1,
        });
    }
    let sigma_bar = p.sigma().principal_submatrix(&sol.support);
    let chol = cholesky(&sigma_bar)?;
    let sigma_bar_inv = chol.inverse();
    let a_bar = chol.solve(&vec![T::one(); sol.support.len()]);
    Ok(ReducedSystem {
        support: sol.support.clone(),
        mu_bar: sol.support.iter().map(|&k| p.mu()[k]).collect(),
        sigma_bar,
        sigma_bar_inv,
        a_bar,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftMode {
    General,
    Dominant(usize),
}

/// Tilt `Λ` of the importance density `N(μ + Λ, Σ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftPlan<T> {
    pub lambda: Vec<T>,
    /// `Λᵗ Σ⁻¹ Λ`.
    pub quad: T,
    /// `Σ⁻¹ Λ`, cached for the likelihood ratio.
    pub eta: Vec<T>,
    pub mode: ShiftMode,
    pub threshold: Threshold<T>,
}

impl<T: Real> ShiftPlan<T> {
    /// The unshifted plan (`Λ = 0`): importance sampling reduces to naive
    /// sampling.
    pub fn zero(p: &Problem<T>, threshold: Threshold<T>) -> Self {
        Self {
            lambda: vec![T::zero(); p.dim()],
            quad: T::zero(),
            eta: vec![T::zero(); p.dim()],
            mode: ShiftMode::General,
            threshold,
        }
    }

    pub fn dominant_index(&self) -> Option<usize> {
        match self.mode {
            ShiftMode::Dominant(i) => Some(i),
            ShiftMode::General => None,
        }
    }

    fn from_lambda(
        p: &Problem<T>,
        lambda: Vec<T>,
        quad: Option<T>,
        mode: ShiftMode,
        threshold: Threshold<T>,
    ) -> Self {
        let eta = p.chol().solve(&lambda);
        let quad = quad.unwrap_or_else(|| p.chol().quad_form(&lambda));
        Self {
            lambda,
            quad,
            eta,
            mode,
            threshold,
        }
    }
}

/// General tilt
/// `Λ_k = Σ_{i,j} Σ_{k,Ī(i)} Σ̄⁻¹_{ij} (log γ − log((Ā₁+⋯+Ā_n̄)/Ā_j) − μ̄_j)`.
pub fn mean_shift_general<T: Real>(
    p: &Problem<T>,
    red: &ReducedSystem<T>,
    threshold: Threshold<T>,
) -> Result<ShiftPlan<T>> {
    let total: T = red.a_bar.iter().copied().sum();
    if red.a_bar.iter().any(|&a| !(a > T::zero())) || !(total > T::zero()) {
        return Err(Error::Domain(
            "reduced row sums must be positive on the simplex support".into(),
        ));
    }
    let lg = threshold.log();
    let rhs: Vec<T> = red
        .a_bar
        .iter()
        .zip(&red.mu_bar)
        .map(|(&a, &mu)| lg - (total / a).ln() - mu)
        .collect();
    // u_i = Σ_j Σ̄⁻¹_{ij} rhs_j
    let u = red.sigma_bar_inv.mul_vec(&rhs);
    let sigma = p.sigma();
    let lambda: Vec<T> = (0..p.dim())
        .map(|k| {
            red.support
                .iter()
                .zip(&u)
                .fold(T::zero(), |acc, (&col, &ui)| acc + sigma[(k, col)] * ui)
        })
        .collect();
    Ok(ShiftPlan::from_lambda(
        p,
        lambda,
        None,
        ShiftMode::General,
        threshold,
    ))
}

/// Dominant-component tilt: `Λ_i = log γ − μ_i` and
/// `Λ_k = (Σ_{ki}/Σ_{ii})(log γ − μ_i)`, with `ΛᵗΣ⁻¹Λ = (log γ − μ_i)²/Σ_ii`.
pub fn mean_shift_dominant<T: Real>(
    p: &Problem<T>,
    report: &DominanceReport<T>,
    threshold: Threshold<T>,
) -> Result<ShiftPlan<T>> {
    let i = report.dominant()?;
    let sigma = p.sigma();
    let d = threshold.log() - p.mu()[i];
    let lambda: Vec<T> = (0..p.dim())
        .map(|k| {
            if k == i {
                d
            } else {
                sigma[(k, i)] / sigma[(i, i)] * d
            }
        })
        .collect();
    let quad = d * d / sigma[(i, i)];
    Ok(ShiftPlan::from_lambda(
        p,
        lambda,
        Some(quad),
        ShiftMode::Dominant(i),
        threshold,
    ))
}

/// Dominant tilt when a component dominates, general tilt otherwise.
pub fn plan_shift<T: Real>(
    p: &Problem<T>,
    report: &DominanceReport<T>,
    threshold: Threshold<T>,
) -> Result<ShiftPlan<T>> {
    if report.holds {
        mean_shift_dominant(p, report, threshold)
    } else {
        let sol = solve_simplex_qp(p.sigma())?;
        let red = reduce(p, &sol)?;
        mean_shift_general(p, &red, threshold)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::paper_problem;
    use crate::model::check_assumption_a;

    fn th(lg: f64) -> Threshold<f64> {
        Threshold::from_log(lg).unwrap()
    }

    #[test]
    fn qp_identity() {
        let s = solve_simplex_qp(&Matrix::<f64>::identity(3)).unwrap();
        for w in &s.w_bar {
            assert!((w - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!((s.value - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.support, vec![0, 1, 2]);
    }

    #[test]
    fn qp_diagonal() {
        let s = solve_simplex_qp(&Matrix::diagonal(&[1.0f64, 2.0])).unwrap();
        assert!((s.w_bar[0] - 2.0 / 3.0).abs() < 1e-10);
        assert!((s.w_bar[1] - 1.0 / 3.0).abs() < 1e-10);
        assert!((s.value - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn qp_paper() {
        let p = paper_problem::<f64>();
        let s = solve_simplex_qp(p.sigma()).unwrap();
        assert_eq!(s.w_bar, vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(s.n_bar(), 1);
        assert_eq!(s.value, 1.0);
    }

    #[test]
    fn qp_errors() {
        let bad = Matrix::from_rows(&[[1.0f64, 2.0], [2.0, 1.0]]).unwrap();
        assert!(matches!(
            solve_simplex_qp(&bad),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(matches!(
            solve_simplex_qp(&Matrix::<f64>::identity(25)),
            Err(Error::DimensionTooLarge { n: 25, max: 24 })
        ));
    }

    #[test]
    fn reduce_cases() {
        let p = paper_problem::<f64>();
        let red = reduce(&p, &solve_simplex_qp(p.sigma()).unwrap()).unwrap();
        assert_eq!(red.support, vec![0]);
        assert_eq!(red.sigma_bar, Matrix::identity(1));
        assert_eq!(red.a_bar, vec![1.0]);
        assert_eq!(red.mu_bar, vec![4.0]);

        let p = Problem::new(vec![0.0f64; 2], Matrix::identity(2)).unwrap();
        let red = reduce(&p, &solve_simplex_qp(p.sigma()).unwrap()).unwrap();
        assert_eq!(red.sigma_bar, Matrix::identity(2));
        assert_eq!(red.a_bar, vec![1.0, 1.0]);

        let p = Problem::new(vec![0.0; 2], Matrix::diagonal(&[1.0, 2.0])).unwrap();
        let sol = solve_simplex_qp(p.sigma()).unwrap();
        assert_eq!(sol.support, vec![0, 1]);
        let red = reduce(&p, &sol).unwrap();
        let a: &[f64] = &red.a_bar;
        assert!((a[0] - 1.0).abs() < 1e-15 && (a[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn general_shift_identity() {
        let p = Problem::new(vec![0.0f64; 2], Matrix::identity(2)).unwrap();
        let red = reduce(&p, &solve_simplex_qp(p.sigma()).unwrap()).unwrap();
        let plan = mean_shift_general(&p, &red, Threshold::from_gamma(2.0).unwrap()).unwrap();
        for l in &plan.lambda {
            assert!(l.abs() < 1e-15);
        }
        let x = 0.013f64;
        let plan = mean_shift_general(&p, &red, Threshold::from_gamma(x).unwrap()).unwrap();
        for l in &plan.lambda {
            assert!((l - (x.ln() - 2f64.ln())).abs() < 1e-14);
        }
        assert_eq!(plan.mode, ShiftMode::General);
    }

    #[test]
    fn dominant_shift_values() {
        let p = paper_problem::<f64>();
        let r = check_assumption_a(&p);
        let plan = mean_shift_dominant(&p, &r, th(2.0)).unwrap();
        assert_eq!(plan.lambda, vec![-2.0, -4.0, -4.0, -4.0]);
        assert_eq!(plan.quad, 4.0);
        assert_eq!(plan.mode, ShiftMode::Dominant(0));

        let plan = mean_shift_dominant(&p, &r, th(4.0)).unwrap();
        assert!(plan.lambda.iter().all(|&l| l == 0.0));
        assert_eq!(plan.quad, 0.0);

        let plan = mean_shift_dominant(&p, &r, th(0.0)).unwrap();
        assert_eq!(plan.lambda, vec![-4.0, -8.0, -8.0, -8.0]);
    }

    #[test]
    fn dominant_quad_matches_quad_form() {
        let p = paper_problem::<f64>();
        let r = check_assumption_a(&p);
        for lg in [-30.0, -2.0, 0.5, 2.0, 3.9] {
            let plan = mean_shift_dominant(&p, &r, th(lg)).unwrap();
            let q = p.quad_form(&plan.lambda).unwrap();
            assert!(
                (q - plan.quad).abs() <= 1e-10 * plan.quad,
                "{lg}: {q} vs {}",
                plan.quad
            );
        }
        // γ = e²: Λᵗ Σ⁻¹ Λ = (log γ − μ₁)²/Σ₁₁ = 4
        let plan = mean_shift_dominant(&p, &r, th(2.0)).unwrap();
        assert!((p.quad_form(&plan.lambda).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn general_matches_dominant_on_single_support() {
        let p = paper_problem::<f64>();
        let r = check_assumption_a(&p);
        let red = reduce(&p, &solve_simplex_qp(p.sigma()).unwrap()).unwrap();
        for lg in [-5.0, -2.0, 0.0, 1.67, 2.0, 4.0] {
            let g = mean_shift_general(&p, &red, th(lg)).unwrap();
            let d = mean_shift_dominant(&p, &r, th(lg)).unwrap();
            assert_eq!(g.lambda, d.lambda, "log γ = {lg}");
        }
    }

    #[test]
    fn dominant_requires_assumption() {
        let p = Problem::new(vec![0.0f64; 2], Matrix::identity(2)).unwrap();
        let r = check_assumption_a(&p);
        assert!(matches!(
            mean_shift_dominant(&p, &r, th(-1.0)),
            Err(Error::AssumptionViolated)
        ));
        let plan = plan_shift(&p, &r, th(-1.0)).unwrap();
        assert_eq!(plan.mode, ShiftMode::General);
    }
}
