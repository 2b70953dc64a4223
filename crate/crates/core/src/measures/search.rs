use num_complex::Complex;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{backflow, bloch_vector, distance_series, MeasureResult, StatePair};
use crate::dynamics::DynamicalMapFamily;
use crate::error::{Error, Result};
use crate::linalg::random::random_unitary;
use crate::linalg::DensityOperator;
use crate::scalar::Real;

/// Optimizer label when the best qubit pair sits at the poles.
pub const EG_PAIR_LABEL: &str = "e/g antipodal pair";
const BEST_FOUND_LABEL: &str = "best found";

/// Candidate pairs for the BLP maximization. Only orthogonal pure pairs are
/// searched; the result is the best pair found, not a certified optimum.
#[derive(Clone, Debug, PartialEq)]
pub struct PairSearchStrategy {
    /// Antipodal Bloch pairs on a Fibonacci sphere (qubits only).
    pub fibonacci_directions: usize,
    /// Seeded Haar-random orthonormal pairs.
    pub random_pairs: usize,
    /// How many of the best candidates get coordinate-descent refinement.
    pub refine_best: usize,
    pub refine_iterations: usize,
    pub initial_step: f64,
    pub seed: u64,
}

impl Default for PairSearchStrategy {
    fn default() -> Self {
        Self {
            fibonacci_directions: 200,
            random_pairs: 200,
            refine_best: 5,
            refine_iterations: 20,
            initial_step: 0.1,
            seed: 0,
        }
    }
}

impl PairSearchStrategy {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

type Ket<T> = Vec<Complex<T>>;

#[derive(Clone)]
struct Candidate<T> {
    psi: Ket<T>,
    phi: Ket<T>,
    value: T,
}

fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(Complex::zero(), |acc, (x, y)| acc + x.conj() * y)
}

fn normalize<T: Real>(v: &mut [Complex<T>]) {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    for z in v.iter_mut() {
        *z = *z / n;
    }
}

/// Gram–Schmidt `phi` against `psi`; falls back to a basis vector if `phi` collapses.
fn orthogonalize<T: Real>(psi: &[Complex<T>], phi: &mut Ket<T>) {
    let overlap = inner(psi, phi);
    for (x, &p) in phi.iter_mut().zip(psi) {
        *x = *x - p * overlap;
    }
    let n = phi.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    if n < T::lit(1e-8) {
        let k = (0..psi.len())
            .min_by(|&a, &b| psi[a].norm().partial_cmp(&psi[b].norm()).unwrap())
            .unwrap();
        *phi = vec![Complex::zero(); psi.len()];
        phi[k] = Complex::new(T::one(), T::zero());
        orthogonalize(psi, phi);
        return;
    }
    normalize(phi);
}

fn pair_of<T: Real>(psi: &[Complex<T>], phi: &[Complex<T>]) -> Result<StatePair<T>> {
    StatePair::equal(DensityOperator::pure(psi)?, DensityOperator::pure(phi)?)
}

/// Summed growth of `D(t)` for one pair.
pub fn pair_increase<T: Real>(family: &DynamicalMapFamily<T>, pair: &StatePair<T>) -> Result<T> {
    Ok(backflow(&distance_series(family, pair)?).total_increase)
}

fn evaluate<T: Real>(family: &DynamicalMapFamily<T>, psi: Ket<T>, phi: Ket<T>) -> Result<Candidate<T>> {
    let value = pair_increase(family, &pair_of(&psi, &phi)?)?;
    Ok(Candidate { psi, phi, value })
}

/// Qubit ket with Bloch vector `(sinθ cosφ, sinθ sinφ, cosθ)`, index 1 being `|e⟩`.
fn bloch_ket<T: Real>(theta: f64, phi: f64) -> Ket<T> {
    let (s, c) = ((theta / 2.0).sin(), (theta / 2.0).cos());
    vec![
        Complex::new(T::lit(s), T::zero()),
        Complex::new(T::lit(c * phi.cos()), T::lit(c * phi.sin())),
    ]
}

fn fibonacci_pairs<T: Real>(n: usize) -> Vec<(Ket<T>, Ket<T>)> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let theta = z.clamp(-1.0, 1.0).acos();
            let phi = golden * i as f64;
            let psi = bloch_ket(theta, phi);
            let anti = bloch_ket(std::f64::consts::PI - theta, phi + std::f64::consts::PI);
            (psi, anti)
        })
        .collect()
}

fn random_pairs<T: Real>(d: usize, n: usize, seed: u64) -> Vec<(Ket<T>, Ket<T>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u = random_unitary::<T, _>(d, &mut rng);
            ((0..d).map(|i| u[(i, 0)]).collect(), (0..d).map(|i| u[(i, 1)]).collect())
        })
        .collect()
}

/// Coordinate descent over the real and imaginary parts of both kets with
/// step halving; `phi` is re-orthogonalized after every move.
fn refine<T: Real>(family: &DynamicalMapFamily<T>, start: Candidate<T>, iterations: usize, step: f64) -> Result<Candidate<T>> {
    let d = start.psi.len();
    // For qubits the orthogonal partner is fixed up to phase by psi.
    let coords = if d == 2 { 2 * d } else { 4 * d };
    let mut best = start;
    let mut step = T::lit(step);
    for _ in 0..iterations {
        let mut improved = false;
        for c in 0..coords {
            for sign in [T::one(), -T::one()] {
                let (mut psi, mut phi) = (best.psi.clone(), best.phi.clone());
                let target = if c < 2 * d { &mut psi } else { &mut phi };
                let (idx, imag) = ((c % (2 * d)) / 2, c % 2 == 1);
                let delta = step * sign;
                if imag {
                    target[idx].im = target[idx].im + delta;
                } else {
                    target[idx].re = target[idx].re + delta;
                }
                normalize(&mut psi);
                orthogonalize(&psi, &mut phi);
                let trial = evaluate(family, psi, phi)?;
                if trial.value > best.value {
                    best = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            step = step * T::lit(0.5);
        }
    }
    Ok(best)
}

/// Largest summed growth of the trace distance over the candidate pairs.
pub fn blp_measure<T: Real>(family: &DynamicalMapFamily<T>, strategy: &PairSearchStrategy) -> Result<MeasureResult<T>> {
    let d = family.dim();
    if d < 2 {
        return Err(Error::InvalidArgument("BLP search needs dimension >= 2".into()));
    }
    let mut starts = Vec::new();
    if d == 2 {
        starts.extend(fibonacci_pairs(strategy.fibonacci_directions));
    }
    starts.extend(random_pairs(d, strategy.random_pairs, strategy.seed));
    if starts.is_empty() {
        return Err(Error::InvalidArgument("pair search has no candidates".into()));
    }
    let candidates = starts
        .into_par_iter()
        .map(|(psi, phi)| evaluate(family, psi, phi))
        .collect::<Result<Vec<_>>>()?;

    // Stable sort keeps the lowest index first among equal values.
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| candidates[b].value.partial_cmp(&candidates[a].value).unwrap());
    let refined = order
        .iter()
        .take(strategy.refine_best)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|&i| refine(family, candidates[i].clone(), strategy.refine_iterations, strategy.initial_step))
        .collect::<Result<Vec<_>>>()?;

    let mut best = &candidates[order[0]];
    for c in &refined {
        if c.value > best.value {
            best = c;
        }
    }
    let optimizer = pair_of(&best.psi, &best.phi)?;
    let series = distance_series(family, &optimizer)?;
    let flow = backflow(&series);
    let label = match bloch_vector(&optimizer.rho1) {
        Ok(n) if n[2].abs() > T::lit(0.999) => EG_PAIR_LABEL,
        _ => BEST_FOUND_LABEL,
    };
    Ok(MeasureResult {
        value: flow.total_increase,
        optimizer,
        label: label.to_string(),
        series,
        increase_intervals: flow.increase_intervals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{build_map_family, ModelSpec, RateProfile, TimeGrid};

    #[test]
    fn fibonacci_pairs_are_antipodal() {
        for (psi, phi) in fibonacci_pairs::<f64>(50) {
            assert!(inner(&psi, &phi).norm() < 1e-12);
        }
    }

    #[test]
    fn orthogonalize_handles_parallel_input() {
        let psi = vec![Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)];
        let mut phi = psi.clone();
        orthogonalize(&psi, &mut phi);
        assert!(inner(&psi, &phi).norm() < 1e-12);
        assert!((inner(&phi, &phi).re - 1.0f64).abs() < 1e-12);
    }

    #[test]
    fn constant_rate_blp_is_zero() {
        let grid = TimeGrid::new(3.0, 300).unwrap();
        let fam = build_map_family(&ModelSpec::amplitude_damping(RateProfile::constant(0.5f64)), &grid).unwrap();
        let strategy = PairSearchStrategy {
            fibonacci_directions: 20,
            random_pairs: 20,
            refine_best: 1,
            refine_iterations: 3,
            ..PairSearchStrategy::default()
        };
        let r = blp_measure(&fam, &strategy).unwrap();
        assert!(r.value < 1e-6);
        assert!(r.increase_intervals.is_empty());
    }

    #[test]
    fn qutrit_search_runs_on_random_pairs() {
        let grid = TimeGrid::new(1.0, 20).unwrap();
        let fam = DynamicalMapFamily::<f64>::identity(grid, 3);
        let strategy = PairSearchStrategy {
            random_pairs: 5,
            refine_best: 1,
            refine_iterations: 2,
            ..PairSearchStrategy::default()
        };
        let r = blp_measure(&fam, &strategy).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.label, BEST_FOUND_LABEL);
    }

    #[test]
    fn sin_rate_blp_values() {
        let grid = TimeGrid::new(std::f64::consts::TAU, 2000).unwrap();
        let rate = RateProfile::sinusoid(1.0, 1.0, 0.0);
        let ad = build_map_family(&ModelSpec::amplitude_damping(rate.clone()), &grid).unwrap();
        let r = blp_measure(&ad, &PairSearchStrategy::default()).unwrap();
        assert!((r.value - (1.0 - (-2f64).exp())).abs() < 5e-3, "{}", r.value);
        assert_eq!(r.label, EG_PAIR_LABEL);
        let deph = build_map_family(&ModelSpec::dephasing(rate), &grid).unwrap();
        let r = blp_measure(&deph, &PairSearchStrategy::default()).unwrap();
        assert!((r.value - (1.0 - (-4f64).exp())).abs() < 5e-3, "{}", r.value);
    }
}
