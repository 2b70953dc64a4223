//! Simulation of open-quantum-system dynamics and quantifiers of
//! non-Markovian memory effects.
//!
//! All numerics are generic over the real scalar ([`Real`], implemented for
//! `f32` and `f64`). The aliases at the crate root fix the scalar to `f64`,
//! which is what the tolerances throughout the crate are calibrated for.

pub mod divisibility;
pub mod dynamics;
mod error;
pub mod linalg;
pub mod measures;
pub mod multitime;
mod scalar;
pub mod trajectories;

pub use error::{Error, Result};
pub use scalar::Real;

pub use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type ComplexMatrix64 = linalg::ComplexMatrix<f64>;
pub type DensityOperator64 = linalg::DensityOperator<f64>;
pub type ModelSpec64 = dynamics::ModelSpec<f64>;
pub type RateProfile64 = dynamics::RateProfile<f64>;
pub type TimeGrid64 = dynamics::TimeGrid<f64>;
pub type MapFamily64 = dynamics::DynamicalMapFamily<f64>;
pub type TotalSystemModel64 = dynamics::TotalSystemModel<f64>;

pub type ComplexMatrix32 = linalg::ComplexMatrix<f32>;
pub type DensityOperator32 = linalg::DensityOperator<f32>;
pub type MapFamily32 = dynamics::DynamicalMapFamily<f32>;
