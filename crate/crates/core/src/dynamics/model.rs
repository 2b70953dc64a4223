use num_complex::Complex;

use super::rate::RateProfile;
use crate::error::{Error, Result};
use crate::linalg::operators::{sigma_minus, sigma_x, sigma_y, sigma_z};
use crate::linalg::ComplexMatrix;
use crate::scalar::Real;

/// One decoherence channel: jump operator and its (signed) rate profile.
#[derive(Clone, Debug)]
pub struct Channel<T> {
    pub operator: ComplexMatrix<T>,
    pub rate: RateProfile<T>,
}

/// Time-local master equation: Hamiltonian plus channels with time-dependent rates.
#[derive(Clone, Debug)]
pub struct ModelSpec<T> {
    dim: usize,
    hamiltonian: ComplexMatrix<T>,
    channels: Vec<Channel<T>>,
}

impl<T: Real> ModelSpec<T> {
    pub fn new(hamiltonian: ComplexMatrix<T>, channels: Vec<Channel<T>>) -> Result<Self> {
        let dim = hamiltonian.rows();
        if dim == 0 || !hamiltonian.is_square() {
            return Err(Error::ContractViolation("Hamiltonian must be square".into()));
        }
        if !hamiltonian.is_hermitian(T::lit(T::TOL_HERM)) {
            return Err(Error::ContractViolation("Hamiltonian must be Hermitian".into()));
        }
        for (k, ch) in channels.iter().enumerate() {
            if ch.operator.rows() != dim || ch.operator.cols() != dim {
                return Err(Error::ContractViolation(format!(
                    "jump operator {k} is {}x{}, expected {dim}x{dim}",
                    ch.operator.rows(),
                    ch.operator.cols()
                )));
            }
            if !ch.operator.is_finite() {
                return Err(Error::ContractViolation(format!("jump operator {k} has non-finite entries")));
            }
        }
        Ok(Self {
            dim,
            hamiltonian,
            channels,
        })
    }

    /// No Hamiltonian, no channels.
    pub fn trivial(dim: usize) -> Self {
        Self {
            dim,
            hamiltonian: ComplexMatrix::zeros(dim, dim),
            channels: Vec::new(),
        }
    }

    /// Qubit with jump operator `σ₋`.
    pub fn amplitude_damping(rate: RateProfile<T>) -> Self {
        Self::single_channel(sigma_minus(), rate)
    }

    /// Qubit with jump operator `σ_z`.
    pub fn dephasing(rate: RateProfile<T>) -> Self {
        Self::single_channel(sigma_z(), rate)
    }

    /// Pauli channels with `γ_x = γ_y = 1`, `γ_z(t) = −tanh t`: CP-divisibility
    /// fails at every `t > 0` while the evolution stays P-divisible.
    pub fn pauli_eternal() -> Self {
        let one = RateProfile::constant(T::one());
        Self {
            dim: 2,
            hamiltonian: ComplexMatrix::zeros(2, 2),
            channels: vec![
                Channel { operator: sigma_x(), rate: one.clone() },
                Channel { operator: sigma_y(), rate: one },
                Channel {
                    operator: sigma_z(),
                    rate: RateProfile::TanhNegative { scale: T::one() },
                },
            ],
        }
    }

    fn single_channel(operator: ComplexMatrix<T>, rate: RateProfile<T>) -> Self {
        Self {
            dim: 2,
            hamiltonian: ComplexMatrix::zeros(2, 2),
            channels: vec![Channel { operator, rate }],
        }
    }

    pub fn with_hamiltonian(mut self, hamiltonian: ComplexMatrix<T>) -> Result<Self> {
        if hamiltonian.rows() != self.dim || !hamiltonian.is_hermitian(T::lit(T::TOL_HERM)) {
            return Err(Error::ContractViolation("Hamiltonian must be Hermitian and match the model dimension".into()));
        }
        self.hamiltonian = hamiltonian;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix<T> {
        &self.hamiltonian
    }

    pub fn channels(&self) -> &[Channel<T>] {
        &self.channels
    }

    /// Rates of all channels at `t`.
    pub fn rates_at(&self, t: T) -> Result<Vec<T>> {
        self.channels.iter().map(|c| c.rate.eval(t)).collect()
    }

    /// Smallest table-domain end among the channels, if any are tabulated.
    pub fn domain_end(&self) -> Option<T> {
        self.channels
            .iter()
            .filter_map(|c| c.rate.domain_end())
            .fold(None, |acc: Option<T>, e| Some(acc.map_or(e, |a| a.min(e))))
    }
}

/// Pre-assembled superoperator pieces; `L(t) = L_H + Σ_k γ_k(t) D_k`.
#[derive(Clone, Debug)]
pub(crate) struct GeneratorParts<T> {
    pub hamiltonian: ComplexMatrix<T>,
    pub dissipators: Vec<ComplexMatrix<T>>,
}

impl<T: Real> GeneratorParts<T> {
    pub fn new(model: &ModelSpec<T>) -> Self {
        let d = model.dim();
        let id = ComplexMatrix::<T>::identity(d);
        let h = model.hamiltonian();
        let minus_i = Complex::new(T::zero(), -T::one());
        // vec(A X B) = (Bᵀ ⊗ A) vec(X) under column stacking.
        let commutator = &id.kron(h) - &h.transpose().kron(&id);
        let hamiltonian = commutator.scale(minus_i);
        let half = T::lit(0.5);
        let dissipators = model
            .channels()
            .iter()
            .map(|ch| {
                let c = &ch.operator;
                let cdc = c.adjoint().matmul(c);
                let jump = c.conj().kron(c);
                let anti = &id.kron(&cdc) + &cdc.transpose().kron(&id);
                &jump - &anti.scale_real(half)
            })
            .collect();
        Self {
            hamiltonian,
            dissipators,
        }
    }

    pub fn at_rates(&self, rates: &[T]) -> ComplexMatrix<T> {
        let mut l = self.hamiltonian.clone();
        for (d, &g) in self.dissipators.iter().zip(rates) {
            if g.is_zero() {
                continue;
            }
            l = &l + &d.scale_real(g);
        }
        l
    }
}

/// Vectorized generator `L(t)` (column stacking) of the time-local master equation.
pub fn generator_at<T: Real>(model: &ModelSpec<T>, t: T) -> Result<ComplexMatrix<T>> {
    let rates = model.rates_at(t)?;
    Ok(GeneratorParts::new(model).at_rates(&rates))
}
