use crate::error::{Error, Result};
use crate::scalar::Real;

/// Time-dependent decay rate `γ(t)` in units of inverse time.
#[derive(Clone, Debug, PartialEq)]
pub enum RateProfile<T> {
    Constant(T),
    /// `a · sin(ω t + φ)`.
    Sinusoid { amplitude: T, omega: T, phase: T },
    /// `−s · tanh(s t)`.
    TanhNegative { scale: T },
    /// Linear interpolation between sorted `(t, γ)` samples.
    Table(Vec<(T, T)>),
}

impl<T: Real> RateProfile<T> {
    pub fn constant(c: T) -> Self {
        Self::Constant(c)
    }

    pub fn sinusoid(amplitude: T, omega: T, phase: T) -> Self {
        Self::Sinusoid { amplitude, omega, phase }
    }

    /// Validated table profile: at least two points, strictly increasing times.
    pub fn table(points: Vec<(T, T)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument("rate table needs at least two points".into()));
        }
        if points.iter().any(|(t, g)| !t.is_finite() || !g.is_finite()) {
            return Err(Error::InvalidArgument("rate table has non-finite entries".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidArgument("rate table times must be strictly increasing".into()));
        }
        Ok(Self::Table(points))
    }

    pub fn eval(&self, t: T) -> Result<T> {
        Ok(match self {
            Self::Constant(c) => *c,
            Self::Sinusoid { amplitude, omega, phase } => *amplitude * (*omega * t + *phase).sin(),
            Self::TanhNegative { scale } => -*scale * (*scale * t).tanh(),
            Self::Table(points) => interpolate(points, t)?,
        })
    }

    /// Largest time at which the profile can be evaluated.
    pub fn domain_end(&self) -> Option<T> {
        match self {
            Self::Table(points) => points.last().map(|p| p.0),
            _ => None,
        }
    }

    /// `Γ(t) = ∫₀ᵗ γ(s) ds`.
    pub fn integrated(&self, t: T) -> Result<T> {
        if t < T::zero() || !t.is_finite() {
            return Err(Error::InvalidArgument(format!("integrated rate needs t >= 0, got {t}")));
        }
        Ok(match self {
            Self::Constant(c) => *c * t,
            Self::Sinusoid { amplitude, omega, phase } => {
                if omega.is_zero() {
                    *amplitude * phase.sin() * t
                } else {
                    *amplitude * (phase.cos() - (*omega * t + *phase).cos()) / *omega
                }
            }
            Self::TanhNegative { scale } => -log_cosh(*scale * t),
            Self::Table(points) => {
                if t.is_zero() {
                    return Ok(T::zero());
                }
                // At least 1000 panels per unit time.
                let panels = (t.to_f64_lossy() * 1000.0).ceil().max(1.0) as usize;
                let h = t / T::from_usize(panels).unwrap();
                let mut acc = (interpolate(points, T::zero())? + interpolate(points, t)?) * T::lit(0.5);
                for i in 1..panels {
                    acc = acc + interpolate(points, h * T::from_usize(i).unwrap())?;
                }
                acc * h
            }
        })
    }
}

fn log_cosh<T: Real>(x: T) -> T {
    // ln cosh x = |x| + ln(1 + e^{-2|x|}) - ln 2, stable for large |x|.
    let a = x.abs();
    a + (-(a + a)).exp().ln_1p() - T::LN_2()
}

fn interpolate<T: Real>(points: &[(T, T)], t: T) -> Result<T> {
    let (t0, tn) = (points[0].0, points[points.len() - 1].0);
    let slack = T::lit(1e-12) * T::one().max(tn.abs());
    if t < t0 - slack || t > tn + slack || !t.is_finite() {
        return Err(Error::OutsideTableDomain {
            t: t.to_f64_lossy(),
            start: t0.to_f64_lossy(),
            end: tn.to_f64_lossy(),
        });
    }
    let t = t.max(t0).min(tn);
    let k = points.partition_point(|p| p.0 <= t).clamp(1, points.len() - 1);
    let (ta, ga) = points[k - 1];
    let (tb, gb) = points[k];
    Ok(ga + (gb - ga) * (t - ta) / (tb - ta))
}

/// `Γ(t)` for a rate profile.
pub fn integrated_rate<T: Real>(profile: &RateProfile<T>, t: T) -> Result<T> {
    profile.integrated(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn closed_forms() {
        assert_eq!(RateProfile::constant(1.0).integrated(1.0).unwrap(), 1.0);
        let s = RateProfile::sinusoid(1.0, 1.0, 0.0);
        assert!((s.integrated(PI).unwrap() - 2.0).abs() < 1e-14);
        assert!(s.integrated(2.0 * PI).unwrap().abs() < 1e-14);
        let th = RateProfile::TanhNegative { scale: 1.0f64 };
        assert!((th.integrated(1.0).unwrap() + 0.433781).abs() < 1e-6);
        assert!((th.integrated(1.0).unwrap() + 1f64.cosh().ln()).abs() < 1e-14);
        assert!((th.integrated(400.0).unwrap() + 400.0 - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn table_interpolates_and_integrates() {
        let tab = RateProfile::table(vec![(0.0f64, 0.0), (1.0, 2.0), (2.0, 0.0)]).unwrap();
        assert!((tab.eval(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((tab.eval(1.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((tab.integrated(2.0).unwrap() - 2.0).abs() < 1e-9);
        assert!(matches!(tab.eval(2.5), Err(Error::OutsideTableDomain { .. })));
    }

    #[test]
    fn table_rejects_unsorted() {
        assert!(RateProfile::table(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(RateProfile::table(vec![(1.0, 1.0), (0.5, 2.0)]).is_err());
    }

    #[test]
    fn negative_time_is_an_error() {
        assert!(RateProfile::constant(1.0).integrated(-1.0).is_err());
    }
}
