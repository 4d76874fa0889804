//! Reference problems used in examples and tests.

use crate::model::Problem;
use crate::numerics::Matrix;
use crate::scalar::Real;

/// The four-dimensional benchmark: `μ = (4, 4, 4, 4)` and a covariance whose
/// first component has the smallest variance, so it dominates the left tail.
pub fn paper_problem<T: Real>() -> Problem<T> {
    let rows = [
        [1.0, 2.0, 2.0, 2.0],
        [2.0, 5.0, 4.0, 4.0],
        [2.0, 4.0, 4.5, 4.0],
        [2.0, 4.0, 4.0, 4.5],
    ];
    let sigma = Matrix::from_row_major(4, rows.iter().flatten().map(|&v| T::lit(v)).collect())
        .expect("square");
    Problem::new(vec![T::lit(4.0); 4], sigma).expect("benchmark covariance is positive definite")
}

/// Independent standard normals in `n` dimensions.
pub fn identity_problem<T: Real>(n: usize) -> Problem<T> {
    Problem::new(vec![T::zero(); n], Matrix::identity(n)).expect("identity is positive definite")
}
