use super::family::{DynamicalMapFamily, MapSource};
use super::grid::TimeGrid;
use crate::error::{Error, Result};
use crate::linalg::operators::{sigma_minus, sigma_plus};
use crate::linalg::{hermitian_eig, partial_trace_matrix, unitary_propagator, ComplexMatrix, DensityOperator, HermitianEig};
use crate::scalar::Real;

/// Largest joint dimension `d_S · d_E` handled by exact dilation.
pub const MAX_JOINT_DIM: usize = 64;

/// System ⊗ environment with a time-independent total Hamiltonian.
/// The system is the first tensor factor.
#[derive(Clone, Debug)]
pub struct TotalSystemModel<T> {
    dim_system: usize,
    dim_env: usize,
    hamiltonian: ComplexMatrix<T>,
    env_state: DensityOperator<T>,
    spectrum: HermitianEig<T>,
}

impl<T: Real> TotalSystemModel<T> {
    pub fn new(
        dim_system: usize,
        dim_env: usize,
        hamiltonian: ComplexMatrix<T>,
        env_state: DensityOperator<T>,
    ) -> Result<Self> {
        let n = dim_system * dim_env;
        if n > MAX_JOINT_DIM {
            return Err(Error::InvalidArgument(format!(
                "joint dimension {n} exceeds the supported maximum {MAX_JOINT_DIM}"
            )));
        }
        if hamiltonian.rows() != n || !hamiltonian.is_square() {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: hamiltonian.rows(),
            });
        }
        if env_state.dim() != dim_env {
            return Err(Error::DimensionMismatch {
                expected: dim_env,
                found: env_state.dim(),
            });
        }
        let spectrum = hermitian_eig(&hamiltonian)?;
        Ok(Self {
            dim_system,
            dim_env,
            hamiltonian,
            env_state,
            spectrum,
        })
    }

    /// Builds `H_S ⊗ I + I ⊗ H_E + H_SE`.
    pub fn from_parts(
        h_system: &ComplexMatrix<T>,
        h_env: &ComplexMatrix<T>,
        h_int: &ComplexMatrix<T>,
        env_state: DensityOperator<T>,
    ) -> Result<Self> {
        let (ds, de) = (h_system.rows(), h_env.rows());
        let h = &(&h_system.kron(&ComplexMatrix::identity(de)) + &ComplexMatrix::identity(ds).kron(h_env)) + h_int;
        Self::new(ds, de, h, env_state)
    }

    /// Qubit–qubit exchange `H_SE = g(σ₊⊗σ₋ + σ₋⊗σ₊)` with the environment in `|g⟩`.
    pub fn exchange(coupling: T) -> Result<Self> {
        let h_int = &sigma_plus::<T>().kron(&sigma_minus()) + &sigma_minus::<T>().kron(&sigma_plus());
        Self::from_parts(
            &ComplexMatrix::zeros(2, 2),
            &ComplexMatrix::zeros(2, 2),
            &h_int.scale_real(coupling),
            DensityOperator::basis(2, 0)?,
        )
    }

    pub fn dim_system(&self) -> usize {
        self.dim_system
    }

    pub fn dim_env(&self) -> usize {
        self.dim_env
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix<T> {
        &self.hamiltonian
    }

    pub fn env_state(&self) -> &DensityOperator<T> {
        &self.env_state
    }

    pub fn dims(&self) -> [usize; 2] {
        [self.dim_system, self.dim_env]
    }

    /// `U(t) = exp(−i H t)`.
    pub fn propagator(&self, t: T) -> ComplexMatrix<T> {
        unitary_propagator(&self.spectrum, t)
    }

    /// `U(t) σ U(t)†`.
    pub fn evolve_joint(&self, sigma: &ComplexMatrix<T>, t: T) -> ComplexMatrix<T> {
        let u = self.propagator(t);
        u.matmul(sigma).matmul(&u.adjoint())
    }

    /// `Φ_{t,0}` as a superoperator, assembled column by column from `tr_E[U (E_rc ⊗ ρ_E) U†]`.
    pub fn map_at(&self, t: T) -> Result<ComplexMatrix<T>> {
        let d = self.dim_system;
        let u = self.propagator(t);
        let ud = u.adjoint();
        let mut phi = ComplexMatrix::zeros(d * d, d * d);
        for c in 0..d {
            for r in 0..d {
                let mut e = ComplexMatrix::zeros(d, d);
                e[(r, c)] = num_complex::Complex::new(T::one(), T::zero());
                let joint = u.matmul(&e.kron(self.env_state.matrix())).matmul(&ud);
                let reduced = partial_trace_matrix(&joint, &self.dims(), 0)?;
                for (i, z) in reduced.vectorize().into_iter().enumerate() {
                    phi[(i, c * d + r)] = z;
                }
            }
        }
        Ok(phi)
    }
}

/// Exact reduced dynamics of a total-system model on the grid.
pub fn total_system_family<T: Real>(
    total: &TotalSystemModel<T>,
    grid: &TimeGrid<T>,
) -> Result<DynamicalMapFamily<T>> {
    let maps = grid.times().map(|t| total.map_at(t)).collect::<Result<Vec<_>>>()?;
    Ok(DynamicalMapFamily::from_parts(
        *grid,
        total.dim_system(),
        maps,
        None,
        MapSource::TotalSystem,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{build_map_family, ModelSpec};

    #[test]
    fn exchange_population_is_cos_squared() {
        let g = 1.3;
        let total = TotalSystemModel::exchange(g).unwrap();
        let grid = TimeGrid::new(3.0, 60).unwrap();
        let fam = total_system_family(&total, &grid).unwrap();
        fam.check_invariants().unwrap();
        let e = DensityOperator::<f64>::basis(2, 1).unwrap();
        for k in 0..grid.len() {
            let t = grid.time(k);
            let p = fam.apply(k, e.matrix())[(1, 1)].re;
            assert!((p - (g * t).cos().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn uncoupled_environment_gives_system_unitary() {
        let hs = ComplexMatrix::from_real_rows(&[&[0.5, 0.2], &[0.2, -0.5]]);
        let he = ComplexMatrix::from_real_rows(&[&[1.0, 0.3], &[0.3, 0.0]]);
        let total = TotalSystemModel::from_parts(&hs, &he, &ComplexMatrix::zeros(4, 4), DensityOperator::maximally_mixed(2).unwrap()).unwrap();
        let grid = TimeGrid::new(2.0, 400).unwrap();
        let exact = total_system_family(&total, &grid).unwrap();
        let me = build_map_family(&ModelSpec::trivial(2).with_hamiltonian(hs.clone()).unwrap(), &grid).unwrap();
        let eig = hermitian_eig(&hs).unwrap();
        for k in 0..grid.len() {
            let u = unitary_propagator(&eig, grid.time(k));
            let conj = u.conj().kron(&u);
            assert!(exact.map(k).max_abs_diff(&conj) < 1e-12);
            assert!(exact.map(k).max_abs_diff(me.map(k)) < 1e-8);
        }
    }

    #[test]
    fn joint_dimension_cap() {
        let n = 65;
        let r = TotalSystemModel::<f64>::new(5, 13, ComplexMatrix::zeros(n, n), DensityOperator::maximally_mixed(13).unwrap());
        assert!(r.is_err());
    }
}
