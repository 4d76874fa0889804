//! Small dense square matrices and the Cholesky kernels built on them.
//!
//! Storage is row-major. Every matrix in this crate is a covariance or one
//! of its principal submatrices, so only square shapes are supported.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds from row-major storage of length `n * n`.
    pub fn from_row_major(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    /// Builds from nested rows; every row must have as many entries as there
    /// are rows.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        debug_assert_eq!(v.len(), self.n);
        (0..self.n).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n, "matmul dimension mismatch");
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }

    /// Principal submatrix on `indices` (in the given order).
    pub fn principal_submatrix(&self, indices: &[usize]) -> Self {
        let k = indices.len();
        let mut out = Self::zeros(k);
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                out[(a, b)] = self[(i, j)];
            }
        }
        out
    }

    /// Elementwise max of `|self - other|`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    /// First pair `(i, j)`, `i < j`, whose entries differ by more than
    /// `rel_tol * max|A|`.
    pub fn asymmetry(&self, rel_tol: T) -> Option<(usize, usize)> {
        let scale = self.max_abs();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if (self[(i, j)] - self[(j, i)]).abs() > rel_tol * scale {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Lower-triangular `L` with strictly positive diagonal and `L Lᵗ = Σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor<T> {
    lower: Matrix<T>,
}

impl<T: Real> CholeskyFactor<T> {
    pub fn lower(&self) -> &Matrix<T> {
        &self.lower
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    /// `L Lᵗ`.
    pub fn reconstruct(&self) -> Matrix<T> {
        self.lower.matmul(&self.lower.transpose())
    }

    /// `L v`, the map taking i.i.d. standard normals to `N(0, Σ)`.
    pub fn mul_lower(&self, v: &[T]) -> Vec<T> {
        let n = self.dim();
        let mut out = vec![T::zero(); n];
        self.mul_lower_into(v, &mut out);
        out
    }

    #[inline]
    pub fn mul_lower_into(&self, v: &[T], out: &mut [T]) {
        let n = self.dim();
        for i in 0..n {
            out[i] = dot(&self.lower.row(i)[..=i], &v[..=i]);
        }
    }

    /// Solves `L x = b`.
    pub fn solve_lower(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        let l = &self.lower;
        let mut x = b.to_vec();
        for i in 0..n {
            let s = dot(&l.row(i)[..i], &x[..i]);
            x[i] = (x[i] - s) / l[(i, i)];
        }
        x
    }

    /// Solves `Lᵗ x = b`.
    pub fn solve_upper(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        let l = &self.lower;
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s = s - l[(k, i)] * x[k];
            }
            x[i] = s / l[(i, i)];
        }
        x
    }

    /// Solves `Σ x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        self.solve_upper(&self.solve_lower(b))
    }

    pub fn inverse(&self) -> Matrix<T> {
        let n = self.dim();
        let mut inv = Matrix::zeros(n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = T::zero());
            e[j] = T::one();
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        // symmetrize against rounding
        for i in 0..n {
            for j in i + 1..n {
                let m = (inv[(i, j)] + inv[(j, i)]) / T::lit(2.0);
                inv[(i, j)] = m;
                inv[(j, i)] = m;
            }
        }
        inv
    }

    /// `vᵗ Σ⁻¹ v` evaluated as `‖L⁻¹ v‖²`, which is non-negative by
    /// construction.
    pub fn quad_form(&self, v: &[T]) -> T {
        self.solve_lower(v).iter().map(|&x| x * x).sum()
    }

    pub fn log_det(&self) -> T {
        (0..self.dim()).map(|i| self.lower[(i, i)].ln()).sum::<T>() * T::lit(2.0)
    }
}

/// Cholesky factorization of a symmetric matrix.
///
/// A pivot `≤ N·ε·max diag` is treated as a failure; the error carries the
/// zero-based index of the offending pivot.
pub fn cholesky<T: Real>(sigma: &Matrix<T>) -> Result<CholeskyFactor<T>> {
    let n = sigma.dim();
    let max_diag = (0..n).fold(T::zero(), |m, i| m.max(sigma[(i, i)]));
    let threshold = T::from_count(n) * T::epsilon() * max_diag;
    let mut l = Matrix::zeros(n);
    for j in 0..n {
        let s = dot(&l.row(j)[..j], &l.row(j)[..j]);
        let pivot = sigma[(j, j)] - s;
        if !(pivot > threshold) || max_diag <= T::zero() {
            return Err(Error::NotPositiveDefinite {
                pivot: j,
                value: pivot.to_f64().unwrap_or(f64::NAN),
            });
        }
        let d = pivot.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let s = dot(&l.row(i)[..j], &l.row(j)[..j]);
            l[(i, j)] = (sigma[(i, j)] - s) / d;
        }
    }
    Ok(CholeskyFactor { lower: l })
}

/// Solves `Σ x = rhs` for symmetric positive-definite `Σ`.
pub fn solve_spd<T: Real>(sigma: &Matrix<T>, rhs: &[T]) -> Result<Vec<T>> {
    if rhs.len() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma.dim(),
            found: rhs.len(),
        });
    }
    Ok(cholesky(sigma)?.solve(rhs))
}

/// Row sums `A_k = Σⱼ (Σ⁻¹)_{kj}`, i.e. the solution of `Σ A = 1`.
pub fn row_sums_inverse<T: Real>(sigma: &Matrix<T>) -> Result<Vec<T>> {
    solve_spd(sigma, &vec![T::one(); sigma.dim()])
}
