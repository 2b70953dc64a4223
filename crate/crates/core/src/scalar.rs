//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar underlying all complex matrices.
///
/// Tolerances are attached to the scalar so that single-precision builds get
/// thresholds they can actually meet.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Default + Sum + Send + Sync + 'static
{
    /// Entrywise Hermiticity tolerance.
    const TOL_HERM: f64;
    /// Allowed negativity of the smallest eigenvalue in positivity checks.
    const TOL_PSD: f64;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const TOL_HERM: f64 = 1e-10;
    const TOL_PSD: f64 = 1e-9;
}

impl Real for f32 {
    const TOL_HERM: f64 = 1e-4;
    const TOL_PSD: f64 = 1e-4;
}
