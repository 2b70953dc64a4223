//! Intermediate maps, Choi matrices, CP-/P-divisibility witnesses and the
//! RHP measure.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{apply_map, DynamicalMapFamily};
use crate::error::{Error, Result};
use crate::linalg::random::random_pure_state;
use crate::linalg::{hermitian_eig, inverse_with_condition, trace_norm, ComplexMatrix};
use crate::scalar::Real;

/// Condition-number gate for inverting `Φ_{t1,0}`.
pub const MAX_CONDITION: f64 = 1e8;
/// `f − 1` below this is treated as zero.
pub const F_EXCESS_TOL: f64 = 1e-7;
/// Default number of sampled pure inputs for the P witness.
pub const DEFAULT_P_SAMPLES: usize = 500;
pub const MIN_P_SAMPLES: usize = 100;

/// `Φ_{t2,t1}` with `Φ_{t2,0} = Φ_{t2,t1} Φ_{t1,0}`.
#[derive(Clone, Debug)]
pub struct IntermediateMap<T> {
    pub t1: T,
    pub t2: T,
    pub matrix: ComplexMatrix<T>,
    /// 1-norm condition number of `Φ_{t1,0}`; `None` when the map was
    /// obtained by composing one-step propagators instead of inverting.
    pub inversion_condition_number: Option<T>,
}

/// `Φ_{t2,0} Φ_{t1,0}⁻¹`, refusing ill-conditioned (non-bijective) `Φ_{t1,0}`.
pub fn intermediate_map<T: Real>(family: &DynamicalMapFamily<T>, t1: T, t2: T) -> Result<IntermediateMap<T>> {
    let grid = family.grid();
    let (k1, k2) = (grid.index_of(t1)?, grid.index_of(t2)?);
    intermediate_map_by_index(family, k1, k2)
}

fn intermediate_map_by_index<T: Real>(
    family: &DynamicalMapFamily<T>,
    k1: usize,
    k2: usize,
) -> Result<IntermediateMap<T>> {
    let grid = family.grid();
    let (t1, t2) = (grid.time(k1), grid.time(k2));
    if k2 < k1 {
        return Err(Error::InvalidArgument(format!("intermediate map needs t2 >= t1 (got {t1} > {t2})")));
    }
    let n = family.dim() * family.dim();
    if k1 == k2 {
        return Ok(IntermediateMap {
            t1,
            t2,
            matrix: ComplexMatrix::identity(n),
            inversion_condition_number: Some(T::one()),
        });
    }
    let non_bijective = |condition: T| Error::NonBijective {
        t: t1.to_f64_lossy(),
        condition: condition.to_f64_lossy(),
    };
    let (inv, cond) = inverse_with_condition(family.map(k1))?.ok_or_else(|| non_bijective(T::infinity()))?;
    if !(cond < T::lit(MAX_CONDITION)) {
        return Err(non_bijective(cond));
    }
    Ok(IntermediateMap {
        t1,
        t2,
        matrix: family.map(k2).matmul(&inv),
        inversion_condition_number: Some(cond),
    })
}

/// Interval map between grid indices. Master-equation families compose their
/// one-step propagators; other families fall back to [`intermediate_map`].
pub fn interval_map<T: Real>(family: &DynamicalMapFamily<T>, k1: usize, k2: usize) -> Result<IntermediateMap<T>> {
    let grid = family.grid();
    if k2 < k1 || k2 > grid.n_steps() {
        return Err(Error::InvalidArgument(format!("invalid interval [{k1}, {k2}]")));
    }
    match family.propagators() {
        Some(props) => {
            let n = family.dim() * family.dim();
            let matrix = props[k1..k2]
                .iter()
                .fold(ComplexMatrix::identity(n), |acc, s| s.matmul(&acc));
            Ok(IntermediateMap {
                t1: grid.time(k1),
                t2: grid.time(k2),
                matrix,
                inversion_condition_number: None,
            })
        }
        None => intermediate_map_by_index(family, k1, k2),
    }
}

/// Choi matrix `Σ_ij Φ(E_ij) ⊗ E_ij = (Φ ⊗ I)(d |Ψ⟩⟨Ψ|)`, trace `d` for
/// trace-preserving maps. System factor first, ancilla second.
#[derive(Clone, Debug)]
pub struct ChoiMatrix<T> {
    pub matrix: ComplexMatrix<T>,
    pub dim: usize,
}

impl<T: Real> ChoiMatrix<T> {
    pub fn min_eigenvalue(&self) -> Result<T> {
        Ok(hermitian_eig(&self.matrix)?.min_eigenvalue())
    }

    /// `(Φ ⊗ I)(|Ψ⟩⟨Ψ|)`, the unit-trace form.
    pub fn unit_trace(&self) -> ComplexMatrix<T> {
        self.matrix.scale_real(T::one() / T::from_usize(self.dim).unwrap())
    }

    pub fn is_cp(&self, tol: T) -> Result<bool> {
        Ok(self.min_eigenvalue()? >= -tol)
    }
}

pub fn choi_of<T: Real>(map: &ComplexMatrix<T>) -> Result<ChoiMatrix<T>> {
    let n = map.rows();
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n || !map.is_square() {
        return Err(Error::ContractViolation(format!(
            "map must be d^2 x d^2, got {}x{}",
            map.rows(),
            map.cols()
        )));
    }
    // Choi[(a,i),(b,j)] = Φ(E_ij)[a,b] = map[b d + a, j d + i].
    let matrix = ComplexMatrix::from_fn(n, n, |row, col| {
        let (a, i) = (row / d, row % d);
        let (b, j) = (col / d, col % d);
        map[(b * d + a, j * d + i)]
    });
    Ok(ChoiMatrix { matrix, dim: d })
}

/// `f(t+ε, t) = ‖(Φ_{t+ε,t} ⊗ I)(|Ψ⟩⟨Ψ|)‖₁`.
pub fn f_value<T: Real>(family: &DynamicalMapFamily<T>, t: T, eps: T) -> Result<T> {
    let grid = family.grid();
    let k = grid.index_of(t)?;
    let steps = grid.steps_in(eps)?;
    if steps == 0 {
        return Err(Error::InvalidArgument("eps must be a positive multiple of dt".into()));
    }
    f_by_index(family, k, k + steps)
}

fn f_by_index<T: Real>(family: &DynamicalMapFamily<T>, k1: usize, k2: usize) -> Result<T> {
    let interval = interval_map(family, k1, k2)?;
    let choi = choi_of(&interval.matrix)?;
    trace_norm(&choi.unit_trace())
}

fn g_from_f<T: Real>(f: T, eps: T) -> T {
    let excess = f - T::one();
    if excess <= T::lit(F_EXCESS_TOL) {
        T::zero()
    } else {
        excess / eps
    }
}

/// Finite-difference `g(t) = (f(t+ε, t) − 1)/ε`; `eps = None` uses the grid step.
pub fn g_value<T: Real>(family: &DynamicalMapFamily<T>, t: T, eps: Option<T>) -> Result<T> {
    let eps = eps.unwrap_or_else(|| family.grid().dt());
    let f = f_value(family, t, eps)?;
    Ok(g_from_f(f, eps))
}

/// RHP measure integrated over the available grid.
#[derive(Clone, Debug)]
pub struct RhpResult<T> {
    pub value: T,
    /// The infinite-horizon integral is truncated here.
    pub truncated_at: T,
    pub eps: T,
    /// `(t, g(t))` at every grid point where `t + ε` is on the grid.
    pub g_series: Vec<(T, T)>,
}

/// `∫ g(t) dt` by the trapezoid rule; `eps = None` uses the grid step.
pub fn rhp_measure<T: Real>(family: &DynamicalMapFamily<T>, eps: Option<T>) -> Result<RhpResult<T>> {
    let grid = family.grid();
    let eps = eps.unwrap_or_else(|| grid.dt());
    let steps = grid.steps_in(eps)?;
    if steps == 0 || steps > grid.n_steps() {
        return Err(Error::InvalidArgument("eps must be a positive multiple of dt within the grid".into()));
    }
    let last = grid.n_steps() - steps;
    let g_series = (0..=last)
        .into_par_iter()
        .map(|k| Ok((grid.time(k), g_from_f(f_by_index(family, k, k + steps)?, eps))))
        .collect::<Result<Vec<_>>>()?;
    let dt = grid.dt();
    let half = T::lit(0.5);
    let value = g_series.windows(2).map(|w| (w[0].1 + w[1].1) * half * dt).sum();
    Ok(RhpResult {
        value,
        truncated_at: grid.t_max(),
        eps,
        g_series,
    })
}

/// Witnesses for one grid interval.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalWitness<T> {
    pub t_start: T,
    pub t_end: T,
    /// Smallest eigenvalue of the interval Choi matrix (trace-`d` normalization).
    pub cp_min_eigenvalue: T,
    /// Smallest output eigenvalue over the sampled pure inputs.
    pub p_min_eigenvalue: T,
    pub cp: bool,
    pub p: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivisibilityReport<T> {
    pub intervals: Vec<IntervalWitness<T>>,
    pub cp_divisible: bool,
    pub p_divisible: bool,
    /// Maximal runs of consecutive non-CP intervals.
    pub cp_violations: Vec<(T, T)>,
    pub p_violations: Vec<(T, T)>,
    pub samples: usize,
    pub seed: u64,
}

/// CP witness (interval Choi spectrum) and sampled P witness for every grid interval.
pub fn divisibility_report<T: Real>(
    family: &DynamicalMapFamily<T>,
    samples: usize,
    seed: u64,
) -> Result<DivisibilityReport<T>> {
    if samples < MIN_P_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "P witness needs at least {MIN_P_SAMPLES} samples, got {samples}"
        )));
    }
    let d = family.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs: Vec<ComplexMatrix<T>> = (0..samples)
        .map(|_| {
            let psi: Vec<Complex<T>> = random_pure_state(d, &mut rng);
            ComplexMatrix::outer(&psi, &psi)
        })
        .collect();
    let tol = T::lit(T::TOL_PSD);
    let grid = family.grid();
    let intervals = (0..grid.n_steps())
        .into_par_iter()
        .map(|k| {
            let m = interval_map(family, k, k + 1)?;
            let cp_min = choi_of(&m.matrix)?.min_eigenvalue()?;
            let mut p_min = T::infinity();
            for rho in &inputs {
                let out = apply_map(&m.matrix, rho);
                p_min = p_min.min(hermitian_eig(&out)?.min_eigenvalue());
            }
            Ok(IntervalWitness {
                t_start: grid.time(k),
                t_end: grid.time(k + 1),
                cp_min_eigenvalue: cp_min,
                p_min_eigenvalue: p_min,
                cp: cp_min >= -tol,
                p: p_min >= -tol,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let cp_violations = merge_runs(&intervals, |w| !w.cp);
    let p_violations = merge_runs(&intervals, |w| !w.p);
    Ok(DivisibilityReport {
        cp_divisible: cp_violations.is_empty(),
        p_divisible: p_violations.is_empty(),
        intervals,
        cp_violations,
        p_violations,
        samples,
        seed,
    })
}

fn merge_runs<T: Real>(intervals: &[IntervalWitness<T>], flagged: impl Fn(&IntervalWitness<T>) -> bool) -> Vec<(T, T)> {
    let mut runs: Vec<(T, T)> = Vec::new();
    let mut open = false;
    for w in intervals {
        if flagged(w) {
            match runs.last_mut() {
                Some(last) if open => last.1 = w.t_end,
                _ => runs.push((w.t_start, w.t_end)),
            }
            open = true;
        } else {
            open = false;
        }
    }
    runs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{build_map_family, total_system_family, ModelSpec, RateProfile, TimeGrid, TotalSystemModel};
    use std::f64::consts::{PI, TAU};

    fn sin_rate() -> RateProfile<f64> {
        RateProfile::sinusoid(1.0, 1.0, 0.0)
    }

    #[test]
    fn choi_of_reference_maps() {
        let id = choi_of(&ComplexMatrix::<f64>::identity(4)).unwrap();
        let eig = hermitian_eig(&id.matrix).unwrap();
        let expected = [0.0, 0.0, 0.0, 2.0];
        for (l, e) in eig.eigenvalues.iter().zip(expected) {
            assert!((l - e).abs() < 1e-12);
        }

        // ρ ↦ tr(ρ) I/2: column (r,c) maps to δ_rc · vec(I/2).
        let depol = ComplexMatrix::from_fn(4, 4, |row, col| {
            let (r, c) = (col % 2, col / 2);
            let (i, j) = (row % 2, row / 2);
            let v = if r == c && i == j { 0.5 } else { 0.0 };
            Complex::new(v, 0.0)
        });
        let choi = choi_of(&depol).unwrap();
        assert!(choi.matrix.max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.5)) < 1e-15);
        assert!(choi.is_cp(1e-9).unwrap());

        // Transposition: vec(Eᵣc) ↦ vec(E_cr).
        let transpose = ComplexMatrix::from_fn(4, 4, |row, col| {
            let (r, c) = (col % 2, col / 2);
            let target = r * 2 + c;
            Complex::new(if row == target { 1.0 } else { 0.0 }, 0.0)
        });
        let choi = choi_of(&transpose).unwrap();
        assert!((choi.min_eigenvalue().unwrap() + 1.0f64).abs() < 1e-12);
        let mut swap = ComplexMatrix::<f64>::zeros(4, 4);
        for a in 0..2 {
            for b in 0..2 {
                swap[(a * 2 + b, b * 2 + a)] = Complex::new(1.0, 0.0);
            }
        }
        assert!(choi.matrix.max_abs_diff(&swap) < 1e-15);
    }

    #[test]
    fn intermediate_map_identity_and_semigroup() {
        let grid = TimeGrid::new(4.0, 400).unwrap();
        let fam = build_map_family(&ModelSpec::amplitude_damping(RateProfile::constant(0.7)), &grid).unwrap();
        let same = intermediate_map(&fam, 1.0, 1.0).unwrap();
        assert!(same.matrix.max_abs_diff(&ComplexMatrix::identity(4)) == 0.0);
        let m = intermediate_map(&fam, 1.0, 2.5).unwrap();
        assert!(m.matrix.max_abs_diff(fam.map_at_time(1.5).unwrap()) < 1e-6);
        let composed = m.matrix.matmul(fam.map_at_time(1.0).unwrap());
        assert!(composed.max_abs_diff(fam.map_at_time(2.5).unwrap()) < 1e-6);
        let id_choi = choi_of(&same.matrix).unwrap();
        assert_eq!(id_choi.matrix, choi_of(&ComplexMatrix::identity(4)).unwrap().matrix);
    }

    #[test]
    fn dephasing_intermediate_coherence_grows() {
        let grid = TimeGrid::new(4.0, 1000).unwrap();
        let fam = build_map_family(&ModelSpec::dephasing(sin_rate()), &grid).unwrap();
        let m = intermediate_map(&fam, 3.5, 3.6).unwrap();
        let gamma = |t: f64| 1.0 - t.cos();
        let expected = (-2.0 * (gamma(3.6) - gamma(3.5))).exp();
        assert!(expected > 1.0);
        assert!((m.matrix[(2, 2)].re - expected).abs() < 1e-6);
        // Propagator route agrees with the inversion route.
        let (k1, k2) = (grid.index_of(3.5).unwrap(), grid.index_of(3.6).unwrap());
        assert!(interval_map(&fam, k1, k2).unwrap().matrix.max_abs_diff(&m.matrix) < 1e-9);
    }

    #[test]
    fn singular_map_is_reported_as_non_bijective() {
        // Exchange coupling g = 1: Φ_{π/2,0} sends every state to |g⟩.
        let grid = TimeGrid::new(PI, 100).unwrap();
        let fam = total_system_family(&TotalSystemModel::exchange(1.0).unwrap(), &grid).unwrap();
        let r = intermediate_map(&fam, PI / 2.0, PI);
        assert!(matches!(r, Err(Error::NonBijective { .. })), "{r:?}");
    }

    #[test]
    fn f_value_examples() {
        let grid = TimeGrid::new(TAU, 2000).unwrap();
        let ad = build_map_family(&ModelSpec::amplitude_damping(RateProfile::constant(1.0)), &grid).unwrap();
        for k in [0, 500, 1999] {
            let f = f_value(&ad, grid.time(k), grid.dt()).unwrap();
            assert!((f - 1.0).abs() < 1e-7);
        }
        let id = DynamicalMapFamily::identity(grid, 2);
        assert!((f_value(&id, grid.time(10), grid.dt()).unwrap() - 1.0).abs() < 1e-14);

        let grid = TimeGrid::new(4.0, 1000).unwrap();
        let deph = build_map_family(&ModelSpec::dephasing(sin_rate()), &grid).unwrap();
        let f = f_value(&deph, 3.5, 0.1).unwrap();
        // Unit-trace Choi eigenvalues (1 ± q)/2 with q = e^{-2ΔΓ} > 1 give f = q.
        let q = (-2.0 * ((1.0 - 3.6f64.cos()) - (1.0 - 3.5f64.cos()))).exp();
        assert!(f > 1.0);
        assert!((f - q).abs() < 1e-6);
    }

    #[test]
    fn g_value_examples() {
        let grid = TimeGrid::new(TAU, 2000).unwrap();
        let t = 3.0 * PI / 2.0;
        let deph = build_map_family(&ModelSpec::dephasing(sin_rate()), &grid).unwrap();
        assert!((g_value(&deph, t, None).unwrap() - 2.0).abs() < 0.02);
        let ad = build_map_family(&ModelSpec::amplitude_damping(sin_rate()), &grid).unwrap();
        assert!((g_value(&ad, t, None).unwrap() - 1.0).abs() < 0.02);
        assert_eq!(g_value(&ad, PI / 2.0, None).unwrap(), 0.0);
    }

    #[test]
    fn p_sample_floor() {
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let id = DynamicalMapFamily::<f64>::identity(grid, 2);
        assert!(divisibility_report(&id, 50, 1).is_err());
        let rep = divisibility_report(&id, 100, 1).unwrap();
        assert!(rep.cp_divisible && rep.p_divisible);
    }
}
