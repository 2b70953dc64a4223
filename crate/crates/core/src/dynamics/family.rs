use num_complex::Complex;
use num_traits::Zero;

use super::grid::TimeGrid;
use super::model::{GeneratorParts, ModelSpec};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityOperator};
use crate::scalar::Real;

/// How a map family was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapSource {
    MasterEquation,
    TotalSystem,
    /// Supplied directly by the caller.
    Explicit,
}

/// Grid-sampled family `{Φ_{t,0}}` of superoperators acting on column-stacked
/// density matrices.
///
/// Families integrated from a master equation also keep the one-step
/// propagators `S_k` with `Φ_{k+1} = S_k Φ_k`, which give interval maps
/// without inverting `Φ_{t,0}`.
#[derive(Clone, Debug)]
pub struct DynamicalMapFamily<T> {
    grid: TimeGrid<T>,
    dim: usize,
    maps: Vec<ComplexMatrix<T>>,
    propagators: Option<Vec<ComplexMatrix<T>>>,
    source: MapSource,
}

/// Tolerance for the trace- and Hermiticity-preservation invariants.
pub const MAP_INVARIANT_TOL: f64 = 1e-8;

impl<T: Real> DynamicalMapFamily<T> {
    /// Wraps caller-provided maps, checking the family invariants.
    pub fn from_maps(grid: TimeGrid<T>, dim: usize, maps: Vec<ComplexMatrix<T>>) -> Result<Self> {
        if maps.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: maps.len(),
            });
        }
        let family = Self {
            grid,
            dim,
            maps,
            propagators: None,
            source: MapSource::Explicit,
        };
        family.check_invariants()?;
        Ok(family)
    }

    /// `Φ_{t,0} = id` for every grid time.
    pub fn identity(grid: TimeGrid<T>, dim: usize) -> Self {
        let id = ComplexMatrix::identity(dim * dim);
        Self {
            grid,
            dim,
            maps: vec![id.clone(); grid.len()],
            propagators: Some(vec![id; grid.n_steps()]),
            source: MapSource::Explicit,
        }
    }

    pub(crate) fn from_parts(
        grid: TimeGrid<T>,
        dim: usize,
        maps: Vec<ComplexMatrix<T>>,
        propagators: Option<Vec<ComplexMatrix<T>>>,
        source: MapSource,
    ) -> Self {
        Self {
            grid,
            dim,
            maps,
            propagators,
            source,
        }
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    /// System dimension `d_S` (maps are `d_S² × d_S²`).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source(&self) -> MapSource {
        self.source
    }

    pub fn maps(&self) -> &[ComplexMatrix<T>] {
        &self.maps
    }

    pub fn map(&self, k: usize) -> &ComplexMatrix<T> {
        &self.maps[k]
    }

    pub fn map_at_time(&self, t: T) -> Result<&ComplexMatrix<T>> {
        Ok(&self.maps[self.grid.index_of(t)?])
    }

    /// One-step propagators, present for master-equation families.
    pub fn propagators(&self) -> Option<&[ComplexMatrix<T>]> {
        self.propagators.as_deref()
    }

    /// `Φ_{t_k,0}(ρ)` as a raw operator (may be non-positive for non-CP maps).
    pub fn apply(&self, k: usize, rho: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        apply_map(&self.maps[k], rho)
    }

    /// Identity at `t = 0`, trace and Hermiticity preservation at every grid time.
    pub fn check_invariants(&self) -> Result<()> {
        let tol = T::lit(MAP_INVARIANT_TOL);
        let n = self.dim * self.dim;
        for (k, m) in self.maps.iter().enumerate() {
            if m.rows() != n || m.cols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: m.rows(),
                });
            }
            if k == 0 && m.max_abs_diff(&ComplexMatrix::identity(n)) > tol {
                return Err(Error::ContractViolation("map at t = 0 is not the identity".into()));
            }
            let tp = trace_preservation_defect(m, self.dim);
            if tp > tol {
                return Err(Error::ContractViolation(format!(
                    "map at grid index {k} is not trace preserving (defect {tp:e})"
                )));
            }
            let hp = hermiticity_preservation_defect(m, self.dim);
            if hp > tol {
                return Err(Error::ContractViolation(format!(
                    "map at grid index {k} is not Hermiticity preserving (defect {hp:e})"
                )));
            }
        }
        Ok(())
    }
}

/// Applies a superoperator to an operator (column stacking).
pub fn apply_map<T: Real>(map: &ComplexMatrix<T>, rho: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    ComplexMatrix::unvectorize(&map.matvec(&rho.vectorize()), rho.rows())
}

/// `max_{r,c} |tr Φ(E_rc) − δ_rc|`.
pub fn trace_preservation_defect<T: Real>(map: &ComplexMatrix<T>, d: usize) -> T {
    let mut worst = T::zero();
    for c in 0..d {
        for r in 0..d {
            let col = c * d + r;
            let tr = (0..d).fold(Complex::<T>::zero(), |acc, i| acc + map[(i * d + i, col)]);
            let target = if r == c { T::one() } else { T::zero() };
            worst = worst.max((tr - Complex::new(target, T::zero())).norm());
        }
    }
    worst
}

/// `max_{r,c} ‖Φ(E_rc)† − Φ(E_cr)‖_max`.
pub fn hermiticity_preservation_defect<T: Real>(map: &ComplexMatrix<T>, d: usize) -> T {
    let mut worst = T::zero();
    for c in 0..d {
        for r in 0..d {
            let a = (c * d + r, r * d + c);
            for i in 0..d {
                for j in 0..d {
                    let lhs = map[(i * d + j, a.0)].conj();
                    let rhs = map[(j * d + i, a.1)];
                    worst = worst.max((lhs - rhs).norm());
                }
            }
        }
    }
    worst
}

/// Density operators along a time grid.
#[derive(Clone, Debug)]
pub struct StateTrajectory<T> {
    pub grid: TimeGrid<T>,
    pub states: Vec<DensityOperator<T>>,
}

fn check_domain<T: Real>(model: &ModelSpec<T>, grid: &TimeGrid<T>) -> Result<()> {
    if let Some(end) = model.domain_end() {
        if grid.t_max() > end * (T::one() + T::lit(1e-12)) {
            return Err(Error::OutsideTableDomain {
                t: grid.t_max().to_f64_lossy(),
                start: 0.0,
                end: end.to_f64_lossy(),
            });
        }
    }
    Ok(())
}

/// Rates at the three RK4 stage times of step `k`.
fn stage_rates<T: Real>(model: &ModelSpec<T>, grid: &TimeGrid<T>, k: usize) -> Result<[Vec<T>; 3]> {
    let t0 = grid.time(k);
    let t1 = grid.time(k + 1);
    let mid = (t0 + t1) * T::lit(0.5);
    Ok([model.rates_at(t0)?, model.rates_at(mid)?, model.rates_at(t1)?])
}

/// Fixed-step RK4 integration of `dρ/dt = L(t) ρ`.
pub fn evolve_state<T: Real>(
    model: &ModelSpec<T>,
    rho0: &DensityOperator<T>,
    grid: &TimeGrid<T>,
) -> Result<StateTrajectory<T>> {
    let d = model.dim();
    if rho0.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rho0.dim(),
        });
    }
    check_domain(model, grid)?;
    let parts = GeneratorParts::new(model);
    let h = grid.dt();
    let half = h * T::lit(0.5);
    let mut v = rho0.matrix().vectorize();
    let mut states = Vec::with_capacity(grid.len());
    states.push(rho0.clone().with_dims(vec![d])?);
    for k in 0..grid.n_steps() {
        let [r0, rm, r1] = stage_rates(model, grid, k)?;
        let (l0, lm, l1) = (parts.at_rates(&r0), parts.at_rates(&rm), parts.at_rates(&r1));
        let k1 = l0.matvec(&v);
        let k2 = lm.matvec(&axpy(&v, half, &k1));
        let k3 = lm.matvec(&axpy(&v, half, &k2));
        let k4 = l1.matvec(&axpy(&v, h, &k3));
        let sixth = h / T::lit(6.0);
        for i in 0..v.len() {
            v[i] = v[i] + (k1[i] + (k2[i] + k3[i]) * T::lit(2.0) + k4[i]) * sixth;
        }
        let m = ComplexMatrix::unvectorize(&v, d).hermitian_part();
        states.push(DensityOperator::new_unchecked_positivity(m, vec![d]).map_err(|e| {
            Error::ContractViolation(format!("state left the density-operator set at step {}: {e}", k + 1))
        })?);
    }
    Ok(StateTrajectory { grid: *grid, states })
}

fn axpy<T: Real>(x: &[Complex<T>], a: T, y: &[Complex<T>]) -> Vec<Complex<T>> {
    x.iter().zip(y).map(|(&xi, &yi)| xi + yi * a).collect()
}

/// RK4 one-step propagator for the linear ODE `dX/dt = L(t) X`.
fn rk4_propagator<T: Real>(
    l0: &ComplexMatrix<T>,
    lm: &ComplexMatrix<T>,
    l1: &ComplexMatrix<T>,
    h: T,
) -> ComplexMatrix<T> {
    let n = l0.rows();
    let id = ComplexMatrix::identity(n);
    let half = h * T::lit(0.5);
    let k1 = l0.clone();
    let k2 = lm.matmul(&(&id + &k1.scale_real(half)));
    let k3 = lm.matmul(&(&id + &k2.scale_real(half)));
    let k4 = l1.matmul(&(&id + &k3.scale_real(h)));
    let incr = &(&k1 + &k4) + &(&k2 + &k3).scale_real(T::lit(2.0));
    &id + &incr.scale_real(h / T::lit(6.0))
}

/// Integrates `dΦ/dt = L(t) Φ`, `Φ(0) = I` on the grid.
pub fn build_map_family<T: Real>(model: &ModelSpec<T>, grid: &TimeGrid<T>) -> Result<DynamicalMapFamily<T>> {
    check_domain(model, grid)?;
    let d = model.dim();
    let parts = GeneratorParts::new(model);
    let h = grid.dt();
    let mut maps = Vec::with_capacity(grid.len());
    let mut props = Vec::with_capacity(grid.n_steps());
    let mut phi = ComplexMatrix::identity(d * d);
    maps.push(phi.clone());
    for k in 0..grid.n_steps() {
        let [r0, rm, r1] = stage_rates(model, grid, k)?;
        let s = rk4_propagator(&parts.at_rates(&r0), &parts.at_rates(&rm), &parts.at_rates(&r1), h);
        phi = s.matmul(&phi);
        maps.push(phi.clone());
        props.push(s);
    }
    Ok(DynamicalMapFamily::from_parts(*grid, d, maps, Some(props), MapSource::MasterEquation))
}

/// `‖Φ_{t1+t2,0} − Φ_{t2,0} Φ_{t1,0}‖_max`.
pub fn semigroup_defect<T: Real>(family: &DynamicalMapFamily<T>, t1: T, t2: T) -> Result<T> {
    let grid = family.grid();
    let k1 = grid.index_of(t1)?;
    let k2 = grid.index_of(t2)?;
    let k12 = grid.index_of(t1 + t2)?;
    let composed = family.map(k2).matmul(family.map(k1));
    Ok(family.map(k12).max_abs_diff(&composed))
}
