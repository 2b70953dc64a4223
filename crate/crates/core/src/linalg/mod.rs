//! Dense complex linear algebra: matrices, states and the Hermitian eigensolver.

mod eig;
mod lu;
mod matrix;
pub mod operators;
pub mod random;
mod state;

pub use eig::{hermitian_eig, hermitian_eig_with_tol, is_psd, trace_norm, unitary_propagator, HermitianEig};
pub use lu::{inverse_with_condition, Lu};
pub use matrix::{tensor_product, ComplexMatrix};
pub use state::{max_entangled_state, partial_trace, partial_trace_matrix, DensityOperator};

/// Default Hermiticity tolerance for `f64`.
pub const TOL_HERM: f64 = 1e-10;
/// Default positivity tolerance for `f64`.
pub const TOL_PSD: f64 = 1e-9;
