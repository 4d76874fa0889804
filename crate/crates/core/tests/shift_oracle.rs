//! Simplex QP and tilt construction against brute-force and analytic oracles.

use lntail::numerics::Matrix;
use lntail::shift::{mean_shift_dominant, mean_shift_general, reduce, solve_simplex_qp, ShiftMode};
use lntail::{check_assumption_a, fixtures, plan_shift, Problem, Threshold};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_pd(rng: &mut ChaCha8Rng, n: usize) -> Matrix<f64> {
    let a = Matrix::from_row_major(n, (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .unwrap();
    let mut s = a.matmul(&a.transpose());
    for i in 0..n {
        s[(i, i)] += 0.05;
    }
    s
}

fn objective(s: &Matrix<f64>, w: &[f64]) -> f64 {
    lntail::numerics::dot(w, &s.mul_vec(w))
}

fn grid_minimum(s: &Matrix<f64>) -> f64 {
    let steps = 100;
    let mut best = f64::INFINITY;
    for i in 0..=steps {
        for j in 0..=steps - i {
            let w = [
                i as f64 / steps as f64,
                j as f64 / steps as f64,
                (steps - i - j) as f64 / steps as f64,
            ];
            best = best.min(objective(s, &w));
        }
    }
    best
}

#[test]
fn enumeration_beats_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..500 {
        let s = random_pd(&mut rng, 3);
        let sol = solve_simplex_qp(&s).unwrap();
        let w = &sol.w_bar;
        assert!(w.iter().all(|&v| v >= 0.0));
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((objective(&s, w) - sol.value).abs() < 1e-12 * sol.value.max(1.0));
        assert!(sol.value <= grid_minimum(&s) + 1e-3, "{s:?}");
    }
}

#[test]
fn solution_is_stable_under_tiny_perturbation() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..200 {
        let n = rng.random_range(2..=5);
        let s = random_pd(&mut rng, n);
        let mut t = s.clone();
        for i in 0..n {
            t[(i, i)] += 1e-9;
        }
        let a = solve_simplex_qp(&s).unwrap().w_bar;
        let b = solve_simplex_qp(&t).unwrap().w_bar;
        let diff = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(diff <= 1e-6, "w̄ moved by {diff:e}");
    }
}

#[test]
fn analytic_solutions() {
    let s = Matrix::<f64>::diagonal(&[1.0, 2.0]);
    let sol = solve_simplex_qp(&s).unwrap();
    assert!((sol.w_bar[0] - 2.0 / 3.0).abs() < 1e-10);
    assert!((sol.w_bar[1] - 1.0 / 3.0).abs() < 1e-10);

    let p = fixtures::paper_problem::<f64>();
    let sol = solve_simplex_qp(p.sigma()).unwrap();
    assert_eq!(sol.w_bar, vec![1.0, 0.0, 0.0, 0.0]);
    assert_eq!(sol.support, vec![0]);
}

/// Covariance of `Y_0 ~ N(0, d)`, `Y_j = b_j Y_0 + X_j` with `b_j > 1`, which
/// makes component 0 dominant.
fn dominant_problem() -> impl Strategy<Value = Problem<f64>> {
    (2usize..=6).prop_flat_map(|n| {
        (
            0.05f64..3.0,
            proptest::collection::vec(1.01f64..3.0, n - 1),
            proptest::collection::vec(-1.0f64..1.0, (n - 1) * (n - 1)),
            proptest::collection::vec(-5.0f64..5.0, n),
        )
            .prop_map(move |(d, b, a, mu)| {
                let k = n - 1;
                let a = Matrix::from_row_major(k, a).unwrap();
                let x = a.matmul(&a.transpose());
                let mut s = Matrix::zeros(n);
                s[(0, 0)] = d;
                for j in 0..k {
                    s[(0, j + 1)] = b[j] * d;
                    s[(j + 1, 0)] = b[j] * d;
                    for l in 0..k {
                        s[(j + 1, l + 1)] = b[j] * b[l] * d + x[(j, l)];
                    }
                    s[(j + 1, j + 1)] += 0.01;
                }
                Problem::new(mu, s).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn dominance_has_positive_exponents(p in dominant_problem()) {
        let r = check_assumption_a(&p);
        prop_assert!(r.holds);
        prop_assert_eq!(r.dominant().unwrap(), 0);
        prop_assert!(r.a.iter().all(|&a| a > 0.0));
    }

    #[test]
    fn general_tilt_reduces_to_dominant(p in dominant_problem(), lg in -30.0f64..2.0) {
        let r = check_assumption_a(&p);
        let th = Threshold::from_log(lg).unwrap();
        let sol = solve_simplex_qp(p.sigma()).unwrap();
        prop_assert_eq!(&sol.support, &vec![0]);
        let g = mean_shift_general(&p, &reduce(&p, &sol).unwrap(), th).unwrap();
        let d = mean_shift_dominant(&p, &r, th).unwrap();
        for (a, b) in g.lambda.iter().zip(&d.lambda) {
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }
        let q = p.quad_form(&d.lambda).unwrap();
        prop_assert!((q - d.quad).abs() <= 1e-10 * d.quad.max(1e-300));
        prop_assert_eq!(plan_shift(&p, &r, th).unwrap().mode, ShiftMode::Dominant(0));
    }
}

#[test]
fn identity_falls_back_to_general_tilt() {
    let p = fixtures::identity_problem::<f64>(3);
    let r = check_assumption_a(&p);
    assert!(!r.holds);
    let plan = plan_shift(&p, &r, Threshold::from_gamma(0.3).unwrap()).unwrap();
    assert_eq!(plan.mode, ShiftMode::General);
    // equal weights on every component: Λ_k = log γ − log 3
    let want = 0.3f64.ln() - 3f64.ln();
    for l in &plan.lambda {
        assert!((l - want).abs() < 1e-12);
    }
}
