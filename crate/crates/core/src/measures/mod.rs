//! Trace distance, BLP measure, Helstrom norm and ancilla-extended witnesses.

mod ancilla;
mod search;

pub use ancilla::{ancilla_distance_series, ancilla_helstrom_series, apply_map_with_ancilla};
pub use search::{blp_measure, pair_increase, PairSearchStrategy, EG_PAIR_LABEL};

use num_complex::Complex;

use crate::dynamics::{apply_map, DynamicalMapFamily};
use crate::error::{Error, Result};
use crate::linalg::{trace_norm, ComplexMatrix, DensityOperator};
use crate::scalar::Real;

/// Per-step increases at or below this are treated as numerical noise.
pub const INCREASE_TOL: f64 = 1e-9;

/// Two states with prior probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct StatePair<T> {
    pub rho1: DensityOperator<T>,
    pub rho2: DensityOperator<T>,
    pub p1: T,
    pub p2: T,
}

impl<T: Real> StatePair<T> {
    pub fn new(rho1: DensityOperator<T>, rho2: DensityOperator<T>, p1: T, p2: T) -> Result<Self> {
        if rho1.dims() != rho2.dims() {
            return Err(Error::DimensionMismatch {
                expected: rho1.dim(),
                found: rho2.dim(),
            });
        }
        let unit = T::zero()..=T::one();
        if !unit.contains(&p1) || !unit.contains(&p2) || (p1 + p2 - T::one()).abs() > T::lit(1e-12) {
            return Err(Error::InvalidArgument(format!("priors {p1}, {p2} must be probabilities summing to 1")));
        }
        Ok(Self { rho1, rho2, p1, p2 })
    }

    /// Equal priors.
    pub fn equal(rho1: DensityOperator<T>, rho2: DensityOperator<T>) -> Result<Self> {
        let half = T::lit(0.5);
        Self::new(rho1, rho2, half, half)
    }

    pub fn dim(&self) -> usize {
        self.rho1.dim()
    }

    /// `p₁ρ¹ − p₂ρ²`.
    pub fn helstrom_matrix(&self) -> ComplexMatrix<T> {
        &self.rho1.matrix().scale_real(self.p1) - &self.rho2.matrix().scale_real(self.p2)
    }

    fn difference(&self) -> ComplexMatrix<T> {
        let half = T::lit(0.5);
        &self.rho1.matrix().scale_real(half) - &self.rho2.matrix().scale_real(half)
    }
}

/// Best pair found by a search together with its series.
#[derive(Clone, Debug)]
pub struct MeasureResult<T> {
    pub value: T,
    pub optimizer: StatePair<T>,
    /// [`EG_PAIR_LABEL`] or `"best found"`.
    pub label: String,
    pub series: Vec<(T, T)>,
    pub increase_intervals: Vec<(T, T)>,
}

/// `½‖ρ¹ − ρ²‖₁`.
pub fn trace_distance<T: Real>(rho1: &DensityOperator<T>, rho2: &DensityOperator<T>) -> Result<T> {
    if rho1.dims() != rho2.dims() {
        return Err(Error::DimensionMismatch {
            expected: rho1.dim(),
            found: rho2.dim(),
        });
    }
    let half = T::lit(0.5);
    trace_norm(&(&rho1.matrix().scale_real(half) - &rho2.matrix().scale_real(half)))
}

fn check_pair_dim<T: Real>(family: &DynamicalMapFamily<T>, pair: &StatePair<T>) -> Result<()> {
    if pair.dim() != family.dim() {
        return Err(Error::DimensionMismatch {
            expected: family.dim(),
            found: pair.dim(),
        });
    }
    Ok(())
}

/// `t ↦ ‖Φ_{t,0}(x)‖₁` over the grid, using linearity of the maps.
pub(crate) fn norm_series<T: Real>(family: &DynamicalMapFamily<T>, x: &ComplexMatrix<T>) -> Result<Vec<(T, T)>> {
    let grid = family.grid();
    family
        .maps()
        .iter()
        .enumerate()
        .map(|(k, m)| Ok((grid.time(k), trace_norm(&apply_map(m, x))?)))
        .collect()
}

/// `D(t) = ½‖Φ_{t,0}ρ¹ − Φ_{t,0}ρ²‖₁` on every grid point.
pub fn distance_series<T: Real>(family: &DynamicalMapFamily<T>, pair: &StatePair<T>) -> Result<Vec<(T, T)>> {
    check_pair_dim(family, pair)?;
    norm_series(family, &pair.difference())
}

/// `E(t) = ‖p₁Φ_{t,0}ρ¹ − p₂Φ_{t,0}ρ²‖₁`.
pub fn helstrom_norm<T: Real>(pair: &StatePair<T>, family: &DynamicalMapFamily<T>, t: T) -> Result<T> {
    check_pair_dim(family, pair)?;
    trace_norm(&apply_map(family.map_at_time(t)?, &pair.helstrom_matrix()))
}

pub fn helstrom_series<T: Real>(family: &DynamicalMapFamily<T>, pair: &StatePair<T>) -> Result<Vec<(T, T)>> {
    check_pair_dim(family, pair)?;
    norm_series(family, &pair.helstrom_matrix())
}

/// Grid intervals where a series grows, and the summed growth.
#[derive(Clone, Debug, PartialEq)]
pub struct Backflow<T> {
    pub increase_intervals: Vec<(T, T)>,
    pub total_increase: T,
}

impl<T: Real> Backflow<T> {
    pub fn is_empty(&self) -> bool {
        self.increase_intervals.is_empty()
    }
}

/// Increments above [`INCREASE_TOL`], merged into maximal runs.
pub fn backflow<T: Real>(series: &[(T, T)]) -> Backflow<T> {
    let tol = T::lit(INCREASE_TOL);
    let mut intervals: Vec<(T, T)> = Vec::new();
    let mut total = T::zero();
    let mut open = false;
    for w in series.windows(2) {
        let inc = w[1].1 - w[0].1;
        if inc > tol {
            total = total + inc;
            match intervals.last_mut() {
                Some(last) if open => last.1 = w[1].0,
                _ => intervals.push((w[0].0, w[1].0)),
            }
            open = true;
        } else {
            open = false;
        }
    }
    Backflow {
        increase_intervals: intervals,
        total_increase: total,
    }
}

/// Growth of `E(t)`; non-empty output certifies broken P-divisibility for bijective families.
pub fn helstrom_backflow<T: Real>(family: &DynamicalMapFamily<T>, pair: &StatePair<T>) -> Result<Backflow<T>> {
    Ok(backflow(&helstrom_series(family, pair)?))
}

/// Optimal single-shot success probability `½(1 + E(t))`.
pub fn binary_guessing_probability<T: Real>(pair: &StatePair<T>, family: &DynamicalMapFamily<T>, t: T) -> Result<T> {
    let e = helstrom_norm(pair, family, t)?;
    Ok(T::lit(0.5) * (T::one() + e))
}

/// Bloch vector of a qubit state.
pub fn bloch_vector<T: Real>(rho: &DensityOperator<T>) -> Result<[T; 3]> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    let m = rho.matrix();
    let two = T::lit(2.0);
    let off: Complex<T> = m[(1, 0)];
    // Index 0 is |g⟩, so σ_z = diag(−1, 1).
    Ok([two * off.re, two * off.im, m[(1, 1)].re - m[(0, 0)].re])
}
