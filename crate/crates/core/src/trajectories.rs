//! Non-Markovian quantum jump (NMQJ) unraveling: an ensemble of distinct pure
//! states with occupation counts, forward jumps for positive rates and reverse
//! jumps for negative rates.
//!
//! Jump rules: forward `P = γ dt ⟨ψ_α|C†C|ψ_α⟩`; reverse (γ < 0) from `α` back to
//! each parent `α′` with `C|ψ_α′⟩ ∝ |ψ_α⟩`, `P = |γ| dt (N_α′/N_α) ⟨ψ_α′|C†C|ψ_α′⟩`.
//! Between jumps every state follows the normalized first-order drift under
//! `H_eff = H − (i/2) Σ_k γ_k(t) C_k†C_k`.

use std::fmt;

use num_complex::Complex;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::dynamics::{ModelSpec, TimeGrid};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityOperator};
use crate::scalar::Real;

/// Largest per-member jump probability in a single step.
pub const PROBABILITY_CAP: f64 = 0.1;
pub const MIN_ENSEMBLE_SIZE: u64 = 1000;
/// A grid step is halved at most this many times to respect the cap.
pub const MAX_SUBSTEP_DEPTH: u32 = 16;
/// Kets closer than this (after phase canonicalization) are the same branch.
const SAME_STATE_TOL: f64 = 1e-9;
/// `‖C ψ‖²` below this means the channel annihilates the state.
const ZERO_NORM: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Reverse,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Forward => "forward",
            Self::Reverse => "reverse",
        })
    }
}

/// One ensemble member jumping; indices refer to [`EnsembleState::states`].
#[derive(Clone, Debug, PartialEq)]
pub struct JumpEvent<T> {
    pub t: T,
    pub channel: usize,
    pub direction: Direction,
    pub source: usize,
    pub target: usize,
}

/// A reverse jump that should have happened but whose parent branch is empty.
#[derive(Clone, Debug, PartialEq)]
pub struct SuppressedReverseJump<T> {
    pub t: T,
    pub channel: usize,
    pub source: usize,
    pub parent: usize,
}

/// Distinct branches `|ψ_α⟩` with counts `N_α`. Branch indices are stable:
/// emptied branches stay with count zero.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleState<T> {
    pub t: T,
    pub states: Vec<Vec<Complex<T>>>,
    pub counts: Vec<u64>,
}

impl<T: Real> EnsembleState<T> {
    pub fn new(psi0: &[Complex<T>], size: u64) -> Result<Self> {
        let norm = psi0.iter().map(|z| z.norm_sqr()).sum::<T>();
        if psi0.is_empty() || (norm - T::one()).abs() > T::lit(1e-10) {
            return Err(Error::InvalidArgument("initial state must be normalized".into()));
        }
        Ok(Self {
            t: T::zero(),
            states: vec![canonical(psi0.to_vec())],
            counts: vec![size],
        })
    }

    pub fn size(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    /// `ρ̂ = Σ_α (N_α/N) |ψ_α⟩⟨ψ_α|`.
    pub fn estimate(&self) -> Result<DensityOperator<T>> {
        let d = self.dim();
        let n = T::from_u64(self.size()).unwrap();
        let mut rho = ComplexMatrix::zeros(d, d);
        for (psi, &c) in self.states.iter().zip(&self.counts) {
            if c > 0 {
                let w = T::from_u64(c).unwrap() / n;
                rho = &rho + &ComplexMatrix::outer(psi, psi).scale_real(w);
            }
        }
        DensityOperator::new(rho.hermitian_part(), vec![d])
    }

    fn find(&self, psi: &[Complex<T>]) -> Option<usize> {
        let tol = T::lit(SAME_STATE_TOL);
        self.states
            .iter()
            .position(|s| s.iter().zip(psi).all(|(a, b)| (*a - *b).norm() < tol))
    }
}

/// Fixes the global phase: first non-negligible amplitude real and positive.
fn canonical<T: Real>(mut psi: Vec<Complex<T>>) -> Vec<Complex<T>> {
    let tol = T::lit(1e-8);
    if let Some(a) = psi.iter().find(|z| z.norm() > tol).copied() {
        let phase = a.conj() / a.norm();
        for z in psi.iter_mut() {
            *z = *z * phase;
        }
    }
    psi
}

fn normalize<T: Real>(mut psi: Vec<Complex<T>>) -> Vec<Complex<T>> {
    let n = psi.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    for z in psi.iter_mut() {
        *z = *z / n;
    }
    psi
}

fn expectation<T: Real>(op: &ComplexMatrix<T>, psi: &[Complex<T>]) -> T {
    let v = op.matvec(psi);
    psi.iter().zip(&v).fold(Complex::zero(), |acc: Complex<T>, (a, b)| acc + a.conj() * b).re
}

/// Where a jump lands.
#[derive(Clone, Debug, PartialEq)]
pub enum JumpTarget<T> {
    State(usize),
    /// Forward image not yet present in the ensemble (canonical phase).
    New(Vec<Complex<T>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct JumpProbability<T> {
    pub source: usize,
    pub channel: usize,
    pub direction: Direction,
    pub target: JumpTarget<T>,
    /// Per-member probability of this outcome within the step.
    pub probability: T,
}

/// Per-branch jump probabilities for one step plus suppressed reverse jumps.
#[derive(Clone, Debug)]
pub struct StepProbabilities<T> {
    pub jumps: Vec<JumpProbability<T>>,
    pub suppressed: Vec<SuppressedReverseJump<T>>,
}

struct Channels<T> {
    ops: Vec<ComplexMatrix<T>>,
    cdc: Vec<ComplexMatrix<T>>,
}

impl<T: Real> Channels<T> {
    fn new(model: &ModelSpec<T>) -> Self {
        let ops: Vec<_> = model.channels().iter().map(|c| c.operator.clone()).collect();
        let cdc = ops.iter().map(|c| c.adjoint().matmul(c)).collect();
        Self { ops, cdc }
    }

    /// Normalized, phase-canonical `C_k ψ`, or `None` if `C_k ψ = 0`.
    fn image(&self, k: usize, psi: &[Complex<T>]) -> Option<Vec<Complex<T>>> {
        let v = self.ops[k].matvec(psi);
        let n2 = v.iter().map(|z| z.norm_sqr()).sum::<T>();
        (n2 > T::lit(ZERO_NORM)).then(|| canonical(normalize(v)))
    }
}

/// Jump probabilities for every occupied branch over `[t, t + dt]`; fails with
/// [`Error::ProbabilityCapExceeded`] when any exceeds [`PROBABILITY_CAP`] or a
/// branch's total exceeds one.
pub fn step_probabilities<T: Real>(
    ensemble: &EnsembleState<T>,
    model: &ModelSpec<T>,
    t: T,
    dt: T,
) -> Result<StepProbabilities<T>> {
    step_probabilities_with(ensemble, &Channels::new(model), &model.rates_at(t)?, t, dt)
}

fn step_probabilities_with<T: Real>(
    ensemble: &EnsembleState<T>,
    channels: &Channels<T>,
    rates: &[T],
    t: T,
    dt: T,
) -> Result<StepProbabilities<T>> {
    let cap = T::lit(PROBABILITY_CAP);
    let mut jumps = Vec::new();
    let mut suppressed = Vec::new();
    for (alpha, psi) in ensemble.states.iter().enumerate() {
        let n_alpha = ensemble.counts[alpha];
        if n_alpha == 0 {
            continue;
        }
        let mut total = T::zero();
        for (k, &gamma) in rates.iter().enumerate() {
            if gamma > T::zero() {
                let p = gamma * dt * expectation(&channels.cdc[k], psi);
                if p <= T::zero() {
                    continue;
                }
                let Some(img) = channels.image(k, psi) else { continue };
                let target = match ensemble.find(&img) {
                    Some(i) => JumpTarget::State(i),
                    None => JumpTarget::New(img),
                };
                total = total + p;
                jumps.push(JumpProbability {
                    source: alpha,
                    channel: k,
                    direction: Direction::Forward,
                    target,
                    probability: p,
                });
            } else if gamma < T::zero() {
                for (parent, ppsi) in ensemble.states.iter().enumerate() {
                    let Some(img) = channels.image(k, ppsi) else { continue };
                    if ensemble.find(&img) != Some(alpha) {
                        continue;
                    }
                    let n_parent = ensemble.counts[parent];
                    if n_parent == 0 {
                        suppressed.push(SuppressedReverseJump {
                            t,
                            channel: k,
                            source: alpha,
                            parent,
                        });
                        continue;
                    }
                    let ratio = T::from_u64(n_parent).unwrap() / T::from_u64(n_alpha).unwrap();
                    let p = -gamma * dt * ratio * expectation(&channels.cdc[k], ppsi);
                    total = total + p;
                    jumps.push(JumpProbability {
                        source: alpha,
                        channel: k,
                        direction: Direction::Reverse,
                        target: JumpTarget::State(parent),
                        probability: p,
                    });
                }
            }
        }
        let worst = jumps
            .iter()
            .filter(|j| j.source == alpha)
            .map(|j| j.probability)
            .fold(T::zero(), |a, b| a.max(b));
        if worst > cap || total > T::one() {
            return Err(Error::ProbabilityCapExceeded {
                probability: worst.max(total).to_f64_lossy(),
                cap: PROBABILITY_CAP,
            });
        }
    }
    Ok(StepProbabilities { jumps, suppressed })
}

/// Result of an NMQJ run: the ensemble at every grid point and the jump log.
#[derive(Clone, Debug)]
pub struct NmqjRun<T> {
    pub grid: TimeGrid<T>,
    pub snapshots: Vec<EnsembleState<T>>,
    pub events: Vec<JumpEvent<T>>,
    pub suppressed: Vec<SuppressedReverseJump<T>>,
    pub seed: u64,
}

impl<T: Real> NmqjRun<T> {
    pub fn estimates(&self) -> Result<Vec<DensityOperator<T>>> {
        self.snapshots.iter().map(|s| s.estimate()).collect()
    }

    pub fn final_state(&self) -> &EnsembleState<T> {
        self.snapshots.last().expect("at least the initial snapshot")
    }
}

struct Runner<'a, T> {
    model: &'a ModelSpec<T>,
    channels: Channels<T>,
    rng: ChaCha8Rng,
    ensemble: EnsembleState<T>,
    events: Vec<JumpEvent<T>>,
    suppressed: Vec<SuppressedReverseJump<T>>,
}

impl<T: Real> Runner<'_, T> {
    fn advance(&mut self, t: T, h: T, depth: u32) -> Result<()> {
        let rates = self.model.rates_at(t)?;
        match step_probabilities_with(&self.ensemble, &self.channels, &rates, t, h) {
            Ok(probs) => {
                self.jump(t, probs)?;
                self.drift(&rates, h);
                Ok(())
            }
            Err(Error::ProbabilityCapExceeded { .. }) if depth < MAX_SUBSTEP_DEPTH => {
                let half = h * T::lit(0.5);
                self.advance(t, half, depth + 1)?;
                self.advance(t + half, half, depth + 1)
            }
            Err(e) => Err(e),
        }
    }

    fn jump(&mut self, t: T, probs: StepProbabilities<T>) -> Result<()> {
        self.suppressed.extend(probs.suppressed);
        let mut delta: Vec<i64> = vec![0; self.ensemble.states.len()];
        let mut start = 0;
        let jumps = probs.jumps;
        while start < jumps.len() {
            let alpha = jumps[start].source;
            let end = start + jumps[start..].iter().take_while(|j| j.source == alpha).count();
            // Multinomial draw over this branch's outcomes by sequential binomials.
            let mut remaining = self.ensemble.counts[alpha];
            let mut used = 0.0f64;
            for j in &jumps[start..end] {
                if remaining == 0 {
                    break;
                }
                let p = j.probability.to_f64_lossy();
                let cond = (p / (1.0 - used)).clamp(0.0, 1.0);
                used += p;
                let n = Binomial::new(remaining, cond)
                    .map_err(|e| Error::InvalidArgument(format!("binomial draw: {e}")))?
                    .sample(&mut self.rng);
                if n == 0 {
                    continue;
                }
                remaining -= n;
                let target = match &j.target {
                    JumpTarget::State(i) => *i,
                    JumpTarget::New(psi) => match self.ensemble.find(psi) {
                        Some(i) => i,
                        None => {
                            self.ensemble.states.push(psi.clone());
                            self.ensemble.counts.push(0);
                            delta.push(0);
                            self.ensemble.states.len() - 1
                        }
                    },
                };
                delta[alpha] -= n as i64;
                delta[target] += n as i64;
                let event = JumpEvent {
                    t,
                    channel: j.channel,
                    direction: j.direction,
                    source: alpha,
                    target,
                };
                self.events.extend(std::iter::repeat_n(event, n as usize));
            }
            start = end;
        }
        for (c, d) in self.ensemble.counts.iter_mut().zip(delta) {
            *c = (*c as i64 + d) as u64;
        }
        Ok(())
    }

    /// `ψ ← normalize((I − i h H_eff) ψ)` for every branch.
    fn drift(&mut self, rates: &[T], h: T) {
        let d = self.ensemble.dim();
        let half = T::lit(0.5);
        let mut anti = ComplexMatrix::<T>::zeros(d, d);
        for (cdc, &g) in self.channels.cdc.iter().zip(rates) {
            anti = &anti + &cdc.scale_real(g * half);
        }
        // −i h H_eff = −i h H − h · ½ Σ γ C†C
        let step = &self.model.hamiltonian().scale(Complex::new(T::zero(), -h)) - &anti.scale_real(h);
        let prop = &ComplexMatrix::identity(d) + &step;
        for psi in self.ensemble.states.iter_mut() {
            *psi = canonical(normalize(prop.matvec(psi)));
        }
        self.ensemble.t = self.ensemble.t + h;
    }
}

/// Evolves `N` members from `psi0` on the grid. Steps whose jump probabilities
/// would exceed [`PROBABILITY_CAP`] are split in halves, up to
/// [`MAX_SUBSTEP_DEPTH`] times.
pub fn run_nmqj<T: Real>(
    model: &ModelSpec<T>,
    psi0: &[Complex<T>],
    grid: &TimeGrid<T>,
    size: u64,
    seed: u64,
) -> Result<NmqjRun<T>> {
    if size < MIN_ENSEMBLE_SIZE {
        return Err(Error::InvalidArgument(format!(
            "ensemble size must be at least {MIN_ENSEMBLE_SIZE}, got {size}"
        )));
    }
    if psi0.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: psi0.len(),
        });
    }
    let mut runner = Runner {
        model,
        channels: Channels::new(model),
        rng: ChaCha8Rng::seed_from_u64(seed),
        ensemble: EnsembleState::new(psi0, size)?,
        events: Vec::new(),
        suppressed: Vec::new(),
    };
    let mut snapshots = Vec::with_capacity(grid.len());
    snapshots.push(runner.ensemble.clone());
    for k in 0..grid.n_steps() {
        let t = grid.time(k);
        runner.advance(t, grid.time(k + 1) - t, 0)?;
        runner.ensemble.t = grid.time(k + 1);
        snapshots.push(runner.ensemble.clone());
    }
    Ok(NmqjRun {
        grid: *grid,
        snapshots,
        events: runner.events,
        suppressed: runner.suppressed,
        seed,
    })
}

/// Event log as CSV with header `t,channel,direction,source_idx,target_idx`.
pub fn events_to_csv<T: Real>(events: &[JumpEvent<T>]) -> String {
    let mut out = String::from("t,channel,direction,source_idx,target_idx\n");
    for e in events {
        out.push_str(&format!("{},{},{},{},{}\n", e.t, e.channel, e.direction, e.source, e.target));
    }
    out
}
