//! Small dense routines on row-major square matrices.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Scalar};

/// Lower Cholesky factor of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    n: usize,
    l: Vec<T>,
}

impl<T: Scalar> Cholesky<T> {
    pub fn new(a: &[T], n: usize) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: a.len() });
        }
        check_symmetric(a, n)?;
        let mut l = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s = s - l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if !(s > T::zero()) || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite);
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(Self { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s = s - self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s = s - self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }

    pub fn log_det(&self) -> T {
        let two = lit::<T>(2.0);
        (0..self.n).fold(T::zero(), |acc, i| acc + two * self.l[i * self.n + i].ln())
    }
}

fn check_symmetric<T: Scalar>(a: &[T], n: usize) -> Result<()> {
    let tol = lit::<T>(1e-10);
    for i in 0..n {
        for j in 0..i {
            let (x, y) = (a[i * n + j], a[j * n + i]);
            let scale = x.abs().max(y.abs()).max(T::one());
            if (x - y).abs() > tol * scale {
                return Err(Error::NotPositiveDefinite);
            }
        }
    }
    Ok(())
}

pub fn mat_vec<T: Scalar>(a: &[T], x: &[T]) -> Vec<T> {
    let n = x.len();
    (0..n).map(|i| (0..n).fold(T::zero(), |acc, j| acc + a[i * n + j] * x[j])).collect()
}

/// Ratio of the largest to the smallest eigenvalue of a symmetric matrix.
///
/// Returns `+inf` when the smallest eigenvalue is not positive.
pub fn condition_number<T: Scalar>(a: &[T], n: usize) -> f64 {
    let m = DMatrix::from_fn(n, n, |i, j| to_f64(a[i * n + j]));
    let eig = SymmetricEigen::new(m);
    let max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cholesky_solves_and_logdet() {
        let a = [4.0, 2.0, 0.4, 2.0, 5.0, 1.0, 0.4, 1.0, 3.0];
        let ch = Cholesky::new(&a, 3).unwrap();
        let x = ch.solve(&[1.0, 2.0, 3.0]);
        let back = mat_vec(&a, &x);
        for (b, e) in back.iter().zip([1.0, 2.0, 3.0]) {
            assert_relative_eq!(*b, e, epsilon = 1e-12);
        }
        let det = 4.0 * (5.0 * 3.0 - 1.0) - 2.0 * (2.0 * 3.0 - 0.4) + 0.4 * (2.0 - 5.0 * 0.4);
        assert_relative_eq!(ch.log_det(), f64::ln(det), epsilon = 1e-12);
    }

    #[test]
    fn rejects_indefinite_and_asymmetric() {
        assert_eq!(Cholesky::new(&[1.0, 2.0, 2.0, 1.0], 2).unwrap_err(), Error::NotPositiveDefinite);
        assert_eq!(Cholesky::new(&[1.0, 0.5, 0.0, 1.0], 2).unwrap_err(), Error::NotPositiveDefinite);
    }

    #[test]
    fn condition_of_diagonal() {
        assert_relative_eq!(condition_number(&[2.0, 0.0, 0.0, 8.0], 2), 4.0, epsilon = 1e-12);
        assert_eq!(condition_number(&[1.0f32], 1), 1.0);
    }
}
