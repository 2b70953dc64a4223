use num_complex::Complex;
use num_traits::{One, Zero};

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    factors: ComplexMatrix<T>,
    perm: Vec<usize>,
}

impl<T: Real> Lu<T> {
    /// Returns `None` when an exactly zero pivot is met.
    pub fn new(a: &ComplexMatrix<T>) -> Result<Option<Self>> {
        if !a.is_square() {
            return Err(Error::ContractViolation("LU needs a square matrix".into()));
        }
        let n = a.rows();
        let mut f = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (pivot, pivot_abs) = (k..n)
                .map(|i| (i, f[(i, k)].norm()))
                .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_abs.is_zero() {
                return Ok(None);
            }
            if pivot != k {
                for j in 0..n {
                    let tmp = f[(k, j)];
                    f[(k, j)] = f[(pivot, j)];
                    f[(pivot, j)] = tmp;
                }
                perm.swap(k, pivot);
            }
            let inv_pivot = Complex::<T>::one() / f[(k, k)];
            for i in k + 1..n {
                let factor = f[(i, k)] * inv_pivot;
                f[(i, k)] = factor;
                if factor.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = f[(k, j)];
                    f[(i, j)] = f[(i, j)] - factor * u;
                }
            }
        }
        Ok(Some(Self { factors: f, perm }))
    }

    pub fn solve_vec(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.perm.len();
        let f = &self.factors;
        let mut x: Vec<Complex<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = f[(i, j)];
                x[i] = x[i] - l * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = f[(i, j)];
                x[i] = x[i] - u * x[j];
            }
            x[i] = x[i] / f[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> ComplexMatrix<T> {
        let n = self.perm.len();
        let mut inv = ComplexMatrix::zeros(n, n);
        let mut e = vec![Complex::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|z| *z = Complex::zero());
            e[j] = Complex::one();
            for (i, z) in self.solve_vec(&e).into_iter().enumerate() {
                inv[(i, j)] = z;
            }
        }
        inv
    }
}

/// Inverse together with its 1-norm condition number; `None` for exactly singular input.
pub fn inverse_with_condition<T: Real>(a: &ComplexMatrix<T>) -> Result<Option<(ComplexMatrix<T>, T)>> {
    Ok(Lu::new(a)?.map(|lu| {
        let inv = lu.inverse();
        let cond = a.norm_one() * inv.norm_one();
        (inv, cond)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trip() {
        let mut a = ComplexMatrix::<f64>::from_real_rows(&[&[0.0, 2.0, 1.0], &[1.0, 1.0, 0.0], &[3.0, 0.0, 1.0]]);
        a[(0, 2)] = Complex::new(1.0, 0.5);
        let (inv, cond) = inverse_with_condition(&a).unwrap().unwrap();
        assert!(a.matmul(&inv).max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
        assert!(cond >= 1.0);
    }

    #[test]
    fn singular_matrix_reports_none() {
        let a = ComplexMatrix::<f64>::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(inverse_with_condition(&a).unwrap().is_none());
    }
}
