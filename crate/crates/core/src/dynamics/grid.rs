use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform grid `t_k = k · dt`, `k = 0..=n_steps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid<T> {
    t_max: T,
    n_steps: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(t_max: T, n_steps: usize) -> Result<Self> {
        if !(t_max > T::zero()) || !t_max.is_finite() {
            return Err(Error::InvalidArgument(format!("t_max must be positive, got {t_max}")));
        }
        if n_steps < 2 {
            return Err(Error::InvalidArgument(format!("n_steps must be >= 2, got {n_steps}")));
        }
        Ok(Self { t_max, n_steps })
    }

    /// `t_max = 2π`, `n_steps = 2000`.
    pub fn default_closed_form() -> Self {
        Self {
            t_max: T::TAU(),
            n_steps: 2000,
        }
    }

    pub fn t_max(&self) -> T {
        self.t_max
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> T {
        self.t_max / T::from_usize(self.n_steps).unwrap()
    }

    pub fn time(&self, k: usize) -> T {
        if k == self.n_steps {
            self.t_max
        } else {
            self.dt() * T::from_usize(k).unwrap()
        }
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        (0..=self.n_steps).map(move |k| self.time(k))
    }

    /// Grid index of `t`, accepting deviations up to `1e-6 · dt`.
    pub fn index_of(&self, t: T) -> Result<usize> {
        let dt = self.dt();
        let x = t / dt;
        let k = x.round();
        let off_grid = Error::OffGrid {
            t: t.to_f64_lossy(),
            dt: dt.to_f64_lossy(),
        };
        if !x.is_finite() || (x - k).abs() > T::lit(1e-6) || k < T::zero() {
            return Err(off_grid);
        }
        let k = k.to_usize().ok_or(off_grid.clone())?;
        if k > self.n_steps {
            return Err(off_grid);
        }
        Ok(k)
    }

    /// Number of grid steps spanning a duration that is a multiple of `dt`.
    pub fn steps_in(&self, duration: T) -> Result<usize> {
        let dt = self.dt();
        let x = duration / dt;
        let k = x.round();
        if !x.is_finite() || k < T::zero() || (x - k).abs() > T::lit(1e-6) {
            return Err(Error::OffGrid {
                t: duration.to_f64_lossy(),
                dt: dt.to_f64_lossy(),
            });
        }
        Ok(k.to_usize().unwrap())
    }
}
