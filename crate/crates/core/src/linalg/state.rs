use num_complex::Complex;
use num_traits::Zero;

use super::eig::hermitian_eig;
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Hermitian, unit-trace, positive semidefinite operator on a (possibly
/// composite) Hilbert space whose factor dimensions are `dims`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator<T> {
    matrix: ComplexMatrix<T>,
    dims: Vec<usize>,
}

impl<T: Real> DensityOperator<T> {
    /// Validates Hermiticity (`TOL_HERM`), unit trace and positivity (`TOL_PSD`).
    pub fn new(matrix: ComplexMatrix<T>, dims: Vec<usize>) -> Result<Self> {
        let rho = Self::new_unchecked_positivity(matrix, dims)?;
        let min = hermitian_eig(&rho.matrix)?.min_eigenvalue();
        if min < -T::lit(T::TOL_PSD) {
            return Err(Error::ContractViolation(format!(
                "density operator has negative eigenvalue {min:e}"
            )));
        }
        Ok(rho)
    }

    /// Like [`DensityOperator::new`] but skips the positivity check, for
    /// deliberately non-positive constructions (outputs of non-CP maps).
    pub fn new_unchecked_positivity(matrix: ComplexMatrix<T>, dims: Vec<usize>) -> Result<Self> {
        let d = matrix.rows();
        if !matrix.is_square() {
            return Err(Error::ContractViolation("density operator must be square".into()));
        }
        if dims.is_empty() || dims.contains(&0) || dims.iter().product::<usize>() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: dims.iter().product(),
            });
        }
        let tol = T::lit(T::TOL_HERM);
        if !matrix.is_finite() || !matrix.is_hermitian(tol) {
            return Err(Error::ContractViolation("density operator must be Hermitian".into()));
        }
        let tr = matrix.trace();
        if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
            return Err(Error::ContractViolation(format!("density operator trace {} != 1", tr.re)));
        }
        Ok(Self { matrix, dims })
    }

    /// Single-factor state from a matrix.
    pub fn from_matrix(matrix: ComplexMatrix<T>) -> Result<Self> {
        let d = matrix.rows();
        Self::new(matrix, vec![d])
    }

    /// `|ψ⟩⟨ψ|` after normalizing `psi`.
    pub fn pure(psi: &[Complex<T>]) -> Result<Self> {
        let psi = normalized(psi)?;
        Self::new(ComplexMatrix::outer(&psi, &psi), vec![psi.len()])
    }

    /// Computational basis projector `|k⟩⟨k|` in dimension `d`.
    pub fn basis(d: usize, k: usize) -> Result<Self> {
        if k >= d {
            return Err(Error::InvalidArgument(format!("basis index {k} out of range for d = {d}")));
        }
        let mut m = ComplexMatrix::zeros(d, d);
        m[(k, k)] = Complex::new(T::one(), T::zero());
        Self::new(m, vec![d])
    }

    pub fn maximally_mixed(d: usize) -> Result<Self> {
        Self::new(ComplexMatrix::identity(d).scale_real(T::one() / T::from_usize(d).unwrap()), vec![d])
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn purity(&self) -> T {
        self.matrix.matmul(&self.matrix).trace().re
    }

    /// Tensor product, concatenating factor lists.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self {
            matrix: self.matrix.kron(&other.matrix),
            dims,
        }
    }

    /// Reinterprets the factor structure (product must match).
    pub fn with_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        if dims.iter().product::<usize>() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: dims.iter().product(),
            });
        }
        self.dims = dims;
        Ok(self)
    }
}

pub(crate) fn normalized<T: Real>(psi: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    if psi.is_empty() || !(norm > T::zero()) || !norm.is_finite() {
        return Err(Error::InvalidArgument("state vector has zero or non-finite norm".into()));
    }
    Ok(psi.iter().map(|z| z / norm).collect())
}

/// Reduced operator on factor `keep` of an operator on `⊗ dims`. Works on any
/// square matrix; traces of the input are preserved.
pub fn partial_trace_matrix<T: Real>(
    m: &ComplexMatrix<T>,
    dims: &[usize],
    keep: usize,
) -> Result<ComplexMatrix<T>> {
    if keep >= dims.len() {
        return Err(Error::InvalidArgument(format!(
            "subsystem index {keep} out of range for {} factors",
            dims.len()
        )));
    }
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            found: m.rows(),
        });
    }
    let dk = dims[keep];
    let inner: usize = dims[keep + 1..].iter().product();
    let outer: usize = dims[..keep].iter().product();
    let mut out = ComplexMatrix::zeros(dk, dk);
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = Complex::zero();
            for o in 0..outer {
                for i in 0..inner {
                    let row = (o * dk + a) * inner + i;
                    let col = (o * dk + b) * inner + i;
                    acc = acc + m[(row, col)];
                }
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Reduced state on factor `keep`.
pub fn partial_trace<T: Real>(rho: &DensityOperator<T>, keep: usize) -> Result<DensityOperator<T>> {
    if rho.dims().len() < 2 {
        return Err(Error::InvalidArgument("partial trace needs at least two factors".into()));
    }
    let m = partial_trace_matrix(rho.matrix(), rho.dims(), keep)?;
    let d = m.rows();
    DensityOperator::new_unchecked_positivity(m, vec![d])
}

/// Projector onto `(1/√d) Σ_i |i⟩|i⟩` with dims `[d, d]`.
pub fn max_entangled_state<T: Real>(d: usize) -> Result<DensityOperator<T>> {
    if d < 2 {
        return Err(Error::InvalidArgument("maximally entangled state needs d >= 2".into()));
    }
    let inv_d = T::one() / T::from_usize(d).unwrap();
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + i, j * d + j)] = Complex::new(inv_d, T::zero());
        }
    }
    DensityOperator::new(m, vec![d, d])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn product_state_reduces_to_factor() {
        let a = DensityOperator::<f64>::from_matrix(ComplexMatrix::from_real_rows(&[&[0.7, 0.2], &[0.2, 0.3]])).unwrap();
        let b = DensityOperator::<f64>::maximally_mixed(3).unwrap();
        let ab = a.tensor(&b);
        assert!(partial_trace(&ab, 0).unwrap().matrix().max_abs_diff(a.matrix()) < 1e-15);
        assert!(partial_trace(&ab, 1).unwrap().matrix().max_abs_diff(b.matrix()) < 1e-15);
    }

    #[test]
    fn singlet_marginal_is_maximally_mixed() {
        let s = 1.0 / 2f64.sqrt();
        let psi = [c(0.0), c(s), c(-s), c(0.0)];
        let rho = DensityOperator::pure(&psi).unwrap().with_dims(vec![2, 2]).unwrap();
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        for keep in 0..2 {
            assert!(partial_trace(&rho, keep).unwrap().matrix().max_abs_diff(&half) < 1e-15);
        }
    }

    #[test]
    fn max_entangled_examples() {
        let rho = max_entangled_state::<f64>(2).unwrap();
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!((rho.matrix()[(i, j)].re - 0.5).abs() < 1e-15);
        }
        assert!((rho.matrix().as_slice().iter().map(|z| z.norm()).sum::<f64>() - 2.0).abs() < 1e-15);

        let rho3 = max_entangled_state::<f64>(3).unwrap();
        assert!((rho3.purity() - 1.0).abs() < 1e-14);
        let eig = hermitian_eig(rho3.matrix()).unwrap();
        assert_eq!(eig.eigenvalues.iter().filter(|&&l| l > 1e-9).count(), 1);
        let third = ComplexMatrix::identity(3).scale_real(1.0 / 3.0);
        assert!(partial_trace(&rho3, 0).unwrap().matrix().max_abs_diff(&third) < 1e-15);
        assert!(max_entangled_state::<f64>(1).is_err());
    }

    #[test]
    fn partial_trace_rejects_bad_index() {
        let rho = max_entangled_state::<f64>(2).unwrap();
        assert!(partial_trace(&rho, 2).is_err());
        assert!(partial_trace(&DensityOperator::<f64>::maximally_mixed(2).unwrap(), 0).is_err());
    }

    #[test]
    fn validation() {
        let bad = ComplexMatrix::<f64>::from_real_diag(&[1.1, -0.1]);
        assert!(DensityOperator::from_matrix(bad.clone()).is_err());
        assert!(DensityOperator::new_unchecked_positivity(bad, vec![2]).is_ok());
        let not_unit = ComplexMatrix::<f64>::from_real_diag(&[0.5, 0.4]);
        assert!(DensityOperator::from_matrix(not_unit).is_err());
    }
}
