//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating-point scalar (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Tolerance `x`, floored at a small multiple of the scalar's machine epsilon so
/// that `f64`-calibrated thresholds stay meaningful for `f32`.
#[inline]
pub fn tol<T: Real>(x: f64) -> T {
    lit::<T>(x).max(T::epsilon() * lit(64.0))
}

#[inline]
pub fn to_radians<T: Real>(deg: T) -> T {
    deg * T::PI() / lit(180.0)
}

#[inline]
pub fn to_degrees<T: Real>(rad: T) -> T {
    rad * lit(180.0) / T::PI()
}

/// Wraps an angle in radians into (-π, π].
pub fn wrap_angle<T: Real>(x: T) -> T {
    let w = x.sin().atan2(x.cos());
    if w <= -T::PI() {
        w + T::TAU()
    } else {
        w
    }
}
