//! Hermitian spectral decomposition.
//!
//! Every spectral quantity in the crate (trace norms, positivity tests,
//! matrix exponentials of Hamiltonians) goes through [`hermitian_eig`], so the
//! Hermiticity tolerance is checked in exactly one place.
//!
//! The solver is the cyclic complex Jacobi method. Each rotation first removes
//! the phase of the pivot `a_pq` with a diagonal unitary and then applies the
//! real symmetric Jacobi rotation, so the accumulated transform stays unitary.

use num_complex::Complex;
use num_traits::Zero;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEig<T> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: ComplexMatrix<T>,
}

impl<T: Real> HermitianEig<T> {
    /// `V f(Λ) V†`.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> Complex<T>) -> ComplexMatrix<T> {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let fvals: Vec<Complex<T>> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n).fold(Complex::zero(), |acc, k| acc + v[(i, k)] * fvals[k] * v[(j, k)].conj())
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        self.reconstruct_with(|l| Complex::new(l, T::zero()))
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues.first().copied().unwrap_or_else(T::zero)
    }

    /// Column `k` of the eigenvector matrix.
    pub fn eigenvector(&self, k: usize) -> Vec<Complex<T>> {
        (0..self.eigenvalues.len()).map(|i| self.eigenvectors[(i, k)]).collect()
    }
}

/// Eigendecomposition at the default Hermiticity tolerance.
pub fn hermitian_eig<T: Real>(a: &ComplexMatrix<T>) -> Result<HermitianEig<T>> {
    hermitian_eig_with_tol(a, T::lit(T::TOL_HERM))
}

/// Eigendecomposition of `a`, which must be Hermitian within `tol_herm`
/// (scaled by `max(1, ‖a‖_max)` so large operators are judged relatively).
pub fn hermitian_eig_with_tol<T: Real>(a: &ComplexMatrix<T>, tol_herm: T) -> Result<HermitianEig<T>> {
    check_hermitian(a, tol_herm)?;
    let n = a.rows();
    let mut m = a.hermitian_part();
    for i in 0..n {
        m[(i, i)] = Complex::new(m[(i, i)].re, T::zero());
    }
    let mut v = ComplexMatrix::<T>::identity(n);

    if n == 1 {
        return Ok(HermitianEig {
            eigenvalues: vec![m[(0, 0)].re],
            eigenvectors: v,
        });
    }

    let scale = m.frobenius_norm();
    let threshold = T::epsilon() * T::epsilon() * scale * scale;
    let mut converged = scale.is_zero();
    let mut sweep = 0;
    while !converged {
        if sweep == MAX_SWEEPS {
            return Err(Error::NotConverged { sweeps: MAX_SWEEPS });
        }
        sweep += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum();
        converged = off <= threshold;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.partial_cmp(&m[(j, j)].re).expect("finite eigenvalues"));
    let eigenvalues = order.iter().map(|&i| m[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(HermitianEig {
        eigenvalues,
        eigenvectors,
    })
}

fn check_hermitian<T: Real>(a: &ComplexMatrix<T>, tol_herm: T) -> Result<()> {
    if !a.is_square() {
        return Err(Error::ContractViolation(format!(
            "expected a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(Error::ContractViolation("matrix has non-finite entries".into()));
    }
    let defect = a.hermiticity_defect();
    let allowed = tol_herm * T::one().max(a.max_abs());
    if defect > allowed {
        return Err(Error::ContractViolation(format!(
            "matrix is not Hermitian (defect {defect:e} > {allowed:e})"
        )));
    }
    Ok(())
}

fn rotate<T: Real>(m: &mut ComplexMatrix<T>, v: &mut ComplexMatrix<T>, p: usize, q: usize) {
    let apq = m[(p, q)];
    let g = apq.norm();
    if g.is_zero() {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    // Skip pivots already negligible relative to their diagonal.
    let tiny = T::epsilon() * T::epsilon();
    if g * g <= tiny * (app * app + aqq * aqq) {
        m[(p, q)] = Complex::zero();
        m[(q, p)] = Complex::zero();
        return;
    }
    let phase = apq / g;
    let two = T::lit(2.0);
    let theta = (aqq - app) / (two * g);
    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;

    // J = diag(1, conj(phase)) · [[c, s], [-s, c]]
    let jpp = Complex::new(c, T::zero());
    let jpq = Complex::new(s, T::zero());
    let jqp = phase.conj() * (-s);
    let jqq = phase.conj() * c;

    let n = m.rows();
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * jpp + mkq * jqp;
        m[(k, q)] = mkp * jpq + mkq * jqq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = jpp.conj() * mpk + jqp.conj() * mqk;
        m[(q, k)] = jpq.conj() * mpk + jqq.conj() * mqk;
    }
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
    m[(p, q)] = Complex::zero();
    m[(q, p)] = Complex::zero();
    m[(p, p)] = Complex::new(m[(p, p)].re, T::zero());
    m[(q, q)] = Complex::new(m[(q, q)].re, T::zero());
}

/// `‖A‖₁ = Σ|λ_i|` for Hermitian `A`.
pub fn trace_norm<T: Real>(a: &ComplexMatrix<T>) -> Result<T> {
    let eig = hermitian_eig(a)?;
    Ok(eig.eigenvalues.iter().map(|l| l.abs()).sum())
}

/// Positivity test: `(min eigenvalue ≥ -tol, min eigenvalue)`.
pub fn is_psd<T: Real>(a: &ComplexMatrix<T>, tol: T) -> Result<(bool, T)> {
    let min = hermitian_eig(a)?.min_eigenvalue();
    Ok((min >= -tol, min))
}

/// `exp(-i H t)` for Hermitian `H`.
pub fn unitary_propagator<T: Real>(h: &HermitianEig<T>, t: T) -> ComplexMatrix<T> {
    h.reconstruct_with(|e| {
        let phase = -e * t;
        Complex::new(phase.cos(), phase.sin())
    })
}
