use crate::error::{Error, Result};
use crate::scalar::Real;

pub const STOCHASTIC_TOL: f64 = 1e-10;
pub const NONNEGATIVE_TOL: f64 = 1e-12;
pub const COMPOSITION_TOL: f64 = 1e-9;

/// `T(x₁, t₁ | x₀, t₀)` stored with the later outcome as row index, so every
/// column is a conditional distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix<T> {
    n: usize,
    entries: Vec<T>,
    pub t0: T,
    pub t1: T,
}

impl<T: Real> TransitionMatrix<T> {
    /// Checks shape and finiteness only, so that non-stochastic candidates can
    /// be handed to [`check_divisible`].
    pub fn new(rows: Vec<Vec<T>>, t0: T, t1: T) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::ContractViolation("transition matrix must be square and non-empty".into()));
        }
        let entries: Vec<T> = rows.into_iter().flatten().collect();
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::ContractViolation("transition matrix has non-finite entries".into()));
        }
        Ok(Self { n, entries, t0, t1 })
    }

    pub fn identity(n: usize, t0: T, t1: T) -> Self {
        let entries = (0..n * n)
            .map(|i| if i / n == i % n { T::one() } else { T::zero() })
            .collect();
        Self { n, entries, t0, t1 }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// `T(x₁ | x₀)`.
    pub fn get(&self, x1: usize, x0: usize) -> T {
        self.entries[x1 * self.n + x0]
    }

    /// `self · earlier`, the transition `earlier.t0 → self.t1`.
    pub fn compose(&self, earlier: &Self) -> Result<Self> {
        if self.n != earlier.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: earlier.n,
            });
        }
        let n = self.n;
        let rows = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| self.get(i, k) * earlier.get(k, j)).sum()).collect())
            .collect();
        Self::new(rows, earlier.t0, self.t1)
    }

    /// Largest `|Σ_{x₁} T(x₁|x₀) − 1|` over columns.
    pub fn stochasticity_violation(&self) -> T {
        (0..self.n)
            .map(|j| ((0..self.n).map(|i| self.get(i, j)).sum::<T>() - T::one()).abs())
            .fold(T::zero(), T::max)
    }

    /// Magnitude of the most negative entry (zero if none).
    pub fn negativity(&self) -> T {
        self.entries.iter().fold(T::zero(), |acc, &x| acc.max(-x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionCheck<T> {
    pub holds: bool,
    pub max_violation: T,
}

/// Verdicts on the three conditions of classical divisibility.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalDivisibilityReport<T> {
    /// (i) columns sum to one.
    pub stochastic: ConditionCheck<T>,
    /// (ii) entries are nonnegative.
    pub nonnegative: ConditionCheck<T>,
    /// (iii) `T31 = T32 · T21`.
    pub composition: ConditionCheck<T>,
}

impl<T: Real> ClassicalDivisibilityReport<T> {
    pub fn divisible(&self) -> bool {
        self.stochastic.holds && self.nonnegative.holds && self.composition.holds
    }

    /// Names of the failing conditions.
    pub fn failures(&self) -> Vec<&'static str> {
        [
            (self.stochastic.holds, "stochastic"),
            (self.nonnegative.holds, "nonnegative"),
            (self.composition.holds, "composition"),
        ]
        .into_iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, name)| name)
        .collect()
    }
}

/// Checks (i) and (ii) on all three matrices and (iii) `T31 = T32 · T21`.
pub fn check_divisible<T: Real>(
    t31: &TransitionMatrix<T>,
    t21: &TransitionMatrix<T>,
    t32: &TransitionMatrix<T>,
) -> Result<ClassicalDivisibilityReport<T>> {
    if t31.n != t21.n || t31.n != t32.n {
        return Err(Error::DimensionMismatch {
            expected: t31.n,
            found: if t21.n != t31.n { t21.n } else { t32.n },
        });
    }
    let all = [t31, t21, t32];
    let stoch = all.iter().map(|m| m.stochasticity_violation()).fold(T::zero(), T::max);
    let neg = all.iter().map(|m| m.negativity()).fold(T::zero(), T::max);
    let product = t32.compose(t21)?;
    let comp = product
        .entries
        .iter()
        .zip(&t31.entries)
        .map(|(a, b)| (*a - *b).abs())
        .fold(T::zero(), T::max);
    Ok(ClassicalDivisibilityReport {
        stochastic: ConditionCheck {
            holds: stoch <= T::lit(STOCHASTIC_TOL),
            max_violation: stoch,
        },
        nonnegative: ConditionCheck {
            holds: neg <= T::lit(NONNEGATIVE_TOL),
            max_violation: neg,
        },
        composition: ConditionCheck {
            holds: comp <= T::lit(COMPOSITION_TOL),
            max_violation: comp,
        },
    })
}

/// Joint probabilities `P(x₀, …, x_n)` at increasing times, `x₀` the slowest index.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution<T> {
    sizes: Vec<usize>,
    probs: Vec<T>,
    pub times: Vec<T>,
}

impl<T: Real> JointDistribution<T> {
    pub fn new(sizes: Vec<usize>, probs: Vec<T>, times: Vec<T>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::ContractViolation("alphabet sizes must be positive".into()));
        }
        if times.len() != sizes.len() || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::ContractViolation("need one strictly increasing time per variable".into()));
        }
        let total: usize = sizes.iter().product();
        if probs.len() != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                found: probs.len(),
            });
        }
        if probs.iter().any(|p| !p.is_finite() || *p < -T::lit(NONNEGATIVE_TOL)) {
            return Err(Error::ContractViolation("joint probabilities must be nonnegative".into()));
        }
        let sum: T = probs.iter().copied().sum();
        if (sum - T::one()).abs() > T::lit(STOCHASTIC_TOL) {
            return Err(Error::ContractViolation(format!("joint probabilities sum to {sum}, not 1")));
        }
        Ok(Self { sizes, probs, times })
    }

    /// Chain `P(x₀) Π_j T_j(x_{j+1}|x_j)`; times are taken from the matrices.
    pub fn from_chain(initial: Vec<T>, steps: &[TransitionMatrix<T>]) -> Result<Self> {
        let n = initial.len();
        if steps.iter().any(|s| s.size() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: steps.iter().map(|s| s.size()).find(|&m| m != n).unwrap_or(n),
            });
        }
        let len = steps.len() + 1;
        let sizes = vec![n; len];
        let mut probs = Vec::with_capacity(n.pow(len as u32));
        for idx in 0..n.pow(len as u32) {
            let xs = digits(idx, &sizes);
            let mut p = initial[xs[0]];
            for (j, s) in steps.iter().enumerate() {
                p = p * s.get(xs[j + 1], xs[j]);
            }
            probs.push(p);
        }
        let times = match steps.first() {
            None => vec![T::zero()],
            Some(first) => std::iter::once(first.t0).chain(steps.iter().map(|s| s.t1)).collect(),
        };
        Self::new(sizes, probs, times)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn probability(&self, xs: &[usize]) -> T {
        let mut idx = 0;
        for (x, s) in xs.iter().zip(&self.sizes) {
            idx = idx * s + x;
        }
        self.probs[idx]
    }

    /// Marginal over the first `len` variables, same index layout.
    fn prefix_marginal(&self, len: usize) -> Vec<T> {
        let inner: usize = self.sizes[len..].iter().product();
        self.probs.chunks(inner).map(|c| c.iter().copied().sum()).collect()
    }
}

fn digits(mut idx: usize, sizes: &[usize]) -> Vec<usize> {
    let mut xs = vec![0; sizes.len()];
    for (x, s) in xs.iter_mut().zip(sizes).rev() {
        *x = idx % s;
        idx /= s;
    }
    xs
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarkovCheck<T> {
    pub markov: bool,
    pub max_violation: T,
}

/// Compares `P(x_n | x_{n−1}, …, x₀)` with `P(x_n | x_{n−1})` for every `n ≥ 2`
/// and every history of positive probability.
pub fn check_classical_markov<T: Real>(joint: &JointDistribution<T>, tol: T) -> Result<MarkovCheck<T>> {
    let m = joint.sizes.len();
    if m < 3 {
        return Err(Error::InvalidArgument("the Markov condition needs at least three times".into()));
    }
    let positive = T::lit(1e-15);
    let mut worst = T::zero();
    for n in 2..m {
        let full = joint.prefix_marginal(n + 1);
        let history = joint.prefix_marginal(n);
        let sizes = &joint.sizes[..=n];
        // Two-time marginal P(x_{n−1}, x_n).
        let (a, b) = (joint.sizes[n - 1], joint.sizes[n]);
        let mut pair = vec![T::zero(); a * b];
        for (idx, &p) in full.iter().enumerate() {
            let xs = digits(idx, sizes);
            pair[xs[n - 1] * b + xs[n]] = pair[xs[n - 1] * b + xs[n]] + p;
        }
        for (idx, &p) in full.iter().enumerate() {
            let h = history[idx / b];
            if h <= positive {
                continue;
            }
            let xs = digits(idx, sizes);
            let prev: T = (0..b).map(|x| pair[xs[n - 1] * b + x]).sum();
            let short = pair[xs[n - 1] * b + xs[n]] / prev;
            worst = worst.max((p / h - short).abs());
        }
    }
    Ok(MarkovCheck {
        markov: worst <= tol,
        max_violation: worst,
    })
}
