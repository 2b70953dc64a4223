//! Seeded sampling of states and unitaries.

use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::ComplexMatrix;
use super::state::DensityOperator;
use crate::scalar::Real;

fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::lit(re), T::lit(im))
}

/// Haar-distributed unit vector in `C^d`.
pub fn random_pure_state<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Complex<T>> {
    loop {
        let v: Vec<Complex<T>> = (0..d).map(|_| gaussian(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if norm > T::lit(1e-6) {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Haar-distributed unitary (Gram–Schmidt on a complex Ginibre matrix).
pub fn random_unitary<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix<T> {
    let mut cols: Vec<Vec<Complex<T>>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<Complex<T>> = (0..d).map(|_| gaussian(rng)).collect();
        for _ in 0..2 {
            for u in &cols {
                let overlap = u.iter().zip(&v).fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b);
                for (x, &ui) in v.iter_mut().zip(u) {
                    *x = *x - ui * overlap;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if norm > T::lit(1e-6) {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    ComplexMatrix::from_fn(d, d, |i, j| cols[j][i])
}

/// Random full-rank state `G G† / tr(G G†)` (Hilbert–Schmidt measure).
pub fn random_density<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityOperator<T> {
    let g = ComplexMatrix::from_fn(d, d, |_, _| gaussian(rng));
    let m = g.matmul(&g.adjoint()).hermitian_part();
    let tr = m.trace().re;
    DensityOperator::from_matrix(m.scale_real(T::one() / tr)).expect("G G† is a valid state")
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(d, d, |_, _| gaussian(rng)).hermitian_part()
}

/// Random pure state for a composite space, returned as a density operator with `dims`.
pub fn random_pure_density<T: Real, R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> DensityOperator<T> {
    let d: usize = dims.iter().product();
    let psi = random_pure_state(d, rng);
    DensityOperator::pure(&psi)
        .and_then(|rho| rho.with_dims(dims.to_vec()))
        .expect("normalized vector")
}
