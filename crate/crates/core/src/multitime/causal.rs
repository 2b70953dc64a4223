use rayon::prelude::*;

use crate::divisibility::choi_of;
use crate::dynamics::{trace_preservation_defect, TotalSystemModel, MAP_INVARIANT_TOL};
use crate::error::{Error, Result};
use crate::linalg::{is_psd, partial_trace_matrix, ComplexMatrix, DensityOperator};
use crate::measures::{apply_map_with_ancilla, trace_distance};
use crate::scalar::Real;

/// Outcomes less likely than this are refused.
pub const MIN_OUTCOME_PROBABILITY: f64 = 1e-12;

/// Completely positive, trace-preserving operation on the open system.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlOperation<T> {
    pub label: String,
    map: ComplexMatrix<T>,
    dim: usize,
}

impl<T: Real> ControlOperation<T> {
    /// Validates CP (Choi spectrum within `TOL_PSD`) and trace preservation.
    pub fn new(label: impl Into<String>, map: ComplexMatrix<T>) -> Result<Self> {
        let choi = choi_of(&map)?;
        let d = choi.dim;
        let (cp, min) = is_psd(&choi.matrix, T::lit(T::TOL_PSD))?;
        if !cp {
            return Err(Error::ContractViolation(format!("control is not CP (Choi eigenvalue {min:e})")));
        }
        let tp = trace_preservation_defect(&map, d);
        if tp > T::lit(MAP_INVARIANT_TOL) {
            return Err(Error::ContractViolation(format!("control is not trace preserving (defect {tp:e})")));
        }
        Ok(Self {
            label: label.into(),
            map,
            dim: d,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            label: "identity".into(),
            map: ComplexMatrix::identity(dim * dim),
            dim,
        }
    }

    /// `ρ ↦ U ρ U†`.
    pub fn unitary(label: impl Into<String>, u: &ComplexMatrix<T>) -> Result<Self> {
        Self::new(label, u.conj().kron(u))
    }

    /// `ρ ↦ Σ K ρ K†`.
    pub fn kraus(label: impl Into<String>, ops: &[ComplexMatrix<T>]) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidArgument("need at least one Kraus operator".into()))?;
        let n = first.rows() * first.rows();
        let mut map = ComplexMatrix::zeros(n, n);
        for k in ops {
            map = &map + &k.conj().kron(k);
        }
        Self::new(label, map)
    }

    pub fn map(&self) -> &ComplexMatrix<T> {
        &self.map
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Two-outcome measurement effect `0 ≤ Π ≤ I`.
#[derive(Clone, Debug, PartialEq)]
pub struct Effect<T> {
    pub label: String,
    operator: ComplexMatrix<T>,
}

impl<T: Real> Effect<T> {
    pub fn new(label: impl Into<String>, operator: ComplexMatrix<T>) -> Result<Self> {
        let tol = T::lit(T::TOL_PSD);
        let d = operator.rows();
        let (lower, _) = is_psd(&operator, tol)?;
        let (upper, _) = is_psd(&(&ComplexMatrix::identity(d) - &operator), tol)?;
        if !lower || !upper {
            return Err(Error::ContractViolation("effect must satisfy 0 <= Π <= I".into()));
        }
        Ok(Self {
            label: label.into(),
            operator,
        })
    }

    /// Projector onto a state.
    pub fn projector(label: impl Into<String>, rho: &DensityOperator<T>) -> Result<Self> {
        Self::new(label, rho.matrix().clone())
    }

    /// `I − Π`.
    pub fn complement(&self) -> Self {
        let d = self.operator.rows();
        Self {
            label: format!("not {}", self.label),
            operator: &ComplexMatrix::identity(d) - &self.operator,
        }
    }

    pub fn operator(&self) -> &ComplexMatrix<T> {
        &self.operator
    }
}

/// Controls at `t₀ … t_{k−1}`, a measure-and-reprepare break at `t_k`, and
/// readout of the system at `t_l`.
#[derive(Clone, Debug)]
pub struct CausalBreakExperiment<T> {
    pub total: TotalSystemModel<T>,
    /// Initial system state; the environment starts in the model's state.
    pub system_state: DensityOperator<T>,
    /// `t₀ < … < t_k < t_l`, so `controls.len() + 2` entries.
    pub times: Vec<T>,
    pub controls: Vec<ControlOperation<T>>,
    pub effect: Effect<T>,
    pub preparation: DensityOperator<T>,
    /// Attach a fresh environment state after the break instead of the
    /// conditional one.
    pub env_reset: bool,
}

impl<T: Real> CausalBreakExperiment<T> {
    pub fn validate(&self) -> Result<()> {
        let ds = self.total.dim_system();
        if self.times.len() != self.controls.len() + 2 {
            return Err(Error::ContractViolation(format!(
                "{} controls need {} times, got {}",
                self.controls.len(),
                self.controls.len() + 2,
                self.times.len()
            )));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::ContractViolation("times must be strictly increasing".into()));
        }
        let dims_ok = self.system_state.dim() == ds
            && self.preparation.dim() == ds
            && self.effect.operator.rows() == ds
            && self.controls.iter().all(|c| c.dim == ds);
        if !dims_ok {
            return Err(Error::DimensionMismatch {
                expected: ds,
                found: self.preparation.dim(),
            });
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.controls.len()
    }
}

/// Joint state after the controls, evolved to `times[k]`.
fn pre_break_state<T: Real>(
    total: &TotalSystemModel<T>,
    system_state: &DensityOperator<T>,
    times: &[T],
    controls: &[ControlOperation<T>],
) -> ComplexMatrix<T> {
    let (ds, de) = (total.dim_system(), total.dim_env());
    let mut sigma = system_state.matrix().kron(total.env_state().matrix());
    for (j, c) in controls.iter().enumerate() {
        sigma = apply_map_with_ancilla(c.map(), &sigma, ds, de);
        sigma = total.evolve_joint(&sigma, times[j + 1] - times[j]);
    }
    sigma
}

/// Readout state at `t_l` and the probability of the break outcome.
#[derive(Clone, Debug)]
pub struct ConditionedState<T> {
    pub state: DensityOperator<T>,
    pub probability: T,
}

/// Exact simulation of the causal-break protocol on the joint space.
pub fn conditioned_state<T: Real>(exp: &CausalBreakExperiment<T>) -> Result<ConditionedState<T>> {
    exp.validate()?;
    let total = &exp.total;
    let (ds, de) = (total.dim_system(), total.dim_env());
    let k = exp.k();
    let sigma = pre_break_state(total, &exp.system_state, &exp.times, &exp.controls);

    let branch = exp.effect.operator.kron(&ComplexMatrix::identity(de)).matmul(&sigma);
    let probability = branch.trace().re;
    if !(probability >= T::lit(MIN_OUTCOME_PROBABILITY)) {
        return Err(Error::ZeroProbabilityOutcome {
            probability: probability.to_f64_lossy(),
        });
    }
    let env = if exp.env_reset {
        total.env_state().matrix().clone()
    } else {
        // tr_S[(Π ⊗ I)σ] equals tr_S[(√Π ⊗ I)σ(√Π ⊗ I)] by cyclicity on S.
        partial_trace_matrix(&branch, &total.dims(), 1)?
            .hermitian_part()
            .scale_real(T::one() / probability)
    };
    let sigma = exp.preparation.matrix().kron(&env);
    let sigma = total.evolve_joint(&sigma, exp.times[k + 1] - exp.times[k]);
    let reduced = partial_trace_matrix(&sigma, &total.dims(), 0)?.hermitian_part();
    Ok(ConditionedState {
        state: DensityOperator::new_unchecked_positivity(reduced, vec![ds])?,
        probability,
    })
}

/// System state at the last time with controls at the earlier ones and no break.
pub fn controlled_state<T: Real>(
    total: &TotalSystemModel<T>,
    system_state: &DensityOperator<T>,
    times: &[T],
    controls: &[ControlOperation<T>],
) -> Result<DensityOperator<T>> {
    if times.len() != controls.len() + 1 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::ContractViolation("need strictly increasing times, one more than controls".into()));
    }
    let sigma = pre_break_state(total, system_state, times, controls);
    let reduced = partial_trace_matrix(&sigma, &total.dims(), 0)?.hermitian_part();
    DensityOperator::new_unchecked_positivity(reduced, vec![total.dim_system()])
}

/// Trace distance between the readout states of two variants that share the
/// model, times and preparation.
pub fn markov_defect<T: Real>(a: &CausalBreakExperiment<T>, b: &CausalBreakExperiment<T>) -> Result<T> {
    if a.times != b.times || a.preparation != b.preparation || a.total.hamiltonian() != b.total.hamiltonian() {
        return Err(Error::InvalidArgument("variants must share model, times and preparation".into()));
    }
    let (sa, sb) = (conditioned_state(a)?, conditioned_state(b)?);
    trace_distance(&sa.state, &sb.state)
}

/// Finite family of causal-break variants.
#[derive(Clone, Debug)]
pub struct CausalBreakSweep<T> {
    pub total: TotalSystemModel<T>,
    pub system_state: DensityOperator<T>,
    pub times: Vec<T>,
    pub control_sequences: Vec<Vec<ControlOperation<T>>>,
    pub effects: Vec<Effect<T>>,
    pub preparations: Vec<(String, DensityOperator<T>)>,
    pub env_reset: bool,
}

#[derive(Clone, Debug)]
pub struct SweepPoint<T> {
    pub control: usize,
    pub effect: usize,
    pub preparation: usize,
    /// `None` when the break outcome has (numerically) zero probability.
    pub outcome: Option<ConditionedState<T>>,
}

#[derive(Clone, Debug)]
pub struct SweepReport<T> {
    pub points: Vec<SweepPoint<T>>,
    /// Largest defect between two (control, effect) variants sharing a preparation.
    pub max_defect: T,
    /// `(preparation, (control, effect), (control, effect))` realizing the maximum.
    pub argmax: Option<(usize, (usize, usize), (usize, usize))>,
    pub notes: Vec<String>,
}

/// Evaluates every (controls, effect, preparation) combination and reports
/// the largest pairwise defect, a lower bound on the memory witnessed by the
/// protocol.
pub fn sweep_markov_defect<T: Real>(sweep: &CausalBreakSweep<T>) -> Result<SweepReport<T>> {
    let combos: Vec<(usize, usize, usize)> = (0..sweep.preparations.len())
        .flat_map(|p| {
            (0..sweep.control_sequences.len())
                .flat_map(move |c| (0..sweep.effects.len()).map(move |e| (c, e, p)))
        })
        .collect();
    let points = combos
        .into_par_iter()
        .map(|(c, e, p)| {
            let exp = CausalBreakExperiment {
                total: sweep.total.clone(),
                system_state: sweep.system_state.clone(),
                times: sweep.times.clone(),
                controls: sweep.control_sequences[c].clone(),
                effect: sweep.effects[e].clone(),
                preparation: sweep.preparations[p].1.clone(),
                env_reset: sweep.env_reset,
            };
            let outcome = match conditioned_state(&exp) {
                Ok(s) => Some(s),
                Err(Error::ZeroProbabilityOutcome { .. }) => None,
                Err(err) => return Err(err),
            };
            Ok(SweepPoint {
                control: c,
                effect: e,
                preparation: p,
                outcome,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut notes = Vec::new();
    for pt in points.iter().filter(|pt| pt.outcome.is_none()) {
        notes.push(format!(
            "excluded zero-probability outcome: controls {}, effect '{}', preparation '{}'",
            pt.control, sweep.effects[pt.effect].label, sweep.preparations[pt.preparation].0
        ));
    }
    let mut max_defect = T::zero();
    let mut argmax = None;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            if a.preparation != b.preparation {
                continue;
            }
            let (Some(sa), Some(sb)) = (&a.outcome, &b.outcome) else { continue };
            let d = trace_distance(&sa.state, &sb.state)?;
            if d > max_defect {
                max_defect = d;
                argmax = Some((a.preparation, (a.control, a.effect), (b.control, b.effect)));
            }
        }
    }
    Ok(SweepReport {
        points,
        max_defect,
        argmax,
        notes,
    })
}

/// Qubit default: controls {identity, identity} and {bit flip, bit flip} before the
/// break, effects `|g⟩⟨g|` and `|+⟩⟨+|`, preparations `|g⟩` and `|+⟩`.
pub fn default_qubit_sweep<T: Real>(
    total: TotalSystemModel<T>,
    system_state: DensityOperator<T>,
    dt: T,
    k: usize,
    env_reset: bool,
) -> Result<CausalBreakSweep<T>> {
    use crate::linalg::operators::{named_qubit_state, sigma_x};
    if total.dim_system() != 2 {
        return Err(Error::InvalidArgument("the default sweep is defined for a qubit system".into()));
    }
    let named = |n: &str| DensityOperator::pure(&named_qubit_state::<T>(n).expect("known state"));
    let flip = ControlOperation::unitary("bit flip", &sigma_x())?;
    let times = (0..k + 2).map(|j| dt * T::from_usize(j).unwrap()).collect();
    Ok(CausalBreakSweep {
        total,
        system_state,
        times,
        control_sequences: vec![vec![ControlOperation::identity(2); k], vec![flip; k]],
        effects: vec![Effect::projector("g", &named("g")?)?, Effect::projector("+", &named("+")?)?],
        preparations: vec![("g".into(), named("g")?), ("+".into(), named("+")?)],
        env_reset,
    })
}
