//! Multi-time tests of memory: classical divisibility and Markov conditions,
//! and the quantum causal-break protocol on exact system–environment models.

mod causal;
mod classical;

pub use causal::{
    conditioned_state, controlled_state, default_qubit_sweep, markov_defect, sweep_markov_defect, CausalBreakExperiment,
    CausalBreakSweep, ConditionedState, ControlOperation, Effect, SweepPoint, SweepReport, MIN_OUTCOME_PROBABILITY,
};
pub use classical::{
    check_classical_markov, check_divisible, ClassicalDivisibilityReport, ConditionCheck, JointDistribution, MarkovCheck,
    TransitionMatrix, COMPOSITION_TOL, NONNEGATIVE_TOL, STOCHASTIC_TOL,
};
