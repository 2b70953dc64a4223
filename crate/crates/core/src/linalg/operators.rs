//! Standard qubit operators.
//!
//! Basis convention: index 0 is the ground state `|g⟩`, index 1 the excited
//! state `|e⟩`. `σ₋ = |g⟩⟨e|` lowers, `σ_z = |e⟩⟨e| − |g⟩⟨g|`.

use num_complex::Complex;

use super::matrix::ComplexMatrix;
use crate::scalar::Real;

pub const GROUND: usize = 0;
pub const EXCITED: usize = 1;

pub fn sigma_x<T: Real>() -> ComplexMatrix<T> {
    ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn sigma_y<T: Real>() -> ComplexMatrix<T> {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(0, 1)] = Complex::new(T::zero(), -T::one());
    m[(1, 0)] = Complex::new(T::zero(), T::one());
    m
}

pub fn sigma_z<T: Real>() -> ComplexMatrix<T> {
    ComplexMatrix::from_real_diag(&[-T::one(), T::one()])
}

/// `σ₋ = |g⟩⟨e|`.
pub fn sigma_minus<T: Real>() -> ComplexMatrix<T> {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(GROUND, EXCITED)] = Complex::new(T::one(), T::zero());
    m
}

/// `σ₊ = |e⟩⟨g|`.
pub fn sigma_plus<T: Real>() -> ComplexMatrix<T> {
    sigma_minus().adjoint()
}

pub fn hadamard<T: Real>() -> ComplexMatrix<T> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_real_rows(&[&[s, s], &[s, -s]])
}

/// Qubit state vectors by conventional name: `g`, `e`, `+`, `-`, `+i`, `-i`.
pub fn named_qubit_state<T: Real>(name: &str) -> Option<Vec<Complex<T>>> {
    let s = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let (o, z) = (T::one(), T::zero());
    let v = match name {
        "g" | "0" => vec![Complex::new(o, z), Complex::new(z, z)],
        "e" | "1" => vec![Complex::new(z, z), Complex::new(o, z)],
        "+" => vec![Complex::new(s, z), Complex::new(s, z)],
        "-" => vec![Complex::new(s, z), Complex::new(-s, z)],
        "+i" => vec![Complex::new(s, z), Complex::new(z, s)],
        "-i" => vec![Complex::new(s, z), Complex::new(z, -s)],
        _ => return None,
    };
    Some(v)
}
