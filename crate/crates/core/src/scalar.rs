//! Scalar abstraction shared by every numeric routine in the crate.

use nalgebra as na;
use num_traits as nt;

/// Real floating point type the solver and certificate can run on.
///
/// Implemented for `f32` and `f64`. Tolerances in the public API are given as
/// `f64` literals and converted with [`lit`], so single precision callers
/// should pick tolerances that make sense for their epsilon.
pub trait Real: na::RealField + Copy + nt::FromPrimitive + nt::ToPrimitive {
    /// Smallest orthonormality tolerance that is meaningful at this precision.
    fn orth_floor() -> Self;

    fn to_f64_lossy(self) -> f64 {
        nt::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    fn orth_floor() -> Self {
        1e-4
    }
}

impl Real for f64 {
    fn orth_floor() -> Self {
        1e-10
    }
}

/// Converts an `f64` constant into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    na::convert(x)
}

/// `max(x, 64 ε)`: relative slack that never drops below a few ulps of `T`.
pub(crate) fn slack_floor<T: Real>(x: f64) -> T {
    let eps = T::default_epsilon() * lit(64.0);
    let x = lit::<T>(x);
    if x > eps {
        x
    } else {
        eps
    }
}
