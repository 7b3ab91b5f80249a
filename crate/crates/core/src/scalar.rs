//! Scalar abstraction: every numerical routine in this crate is generic over
//! a floating-point type.

use std::fmt;
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar used throughout the crate (`f32` or `f64`).
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + fmt::Debug
    + fmt::Display
    + Default
    + 'static
{
    /// Lossy conversion from `f64`, for tolerances and literal coefficients.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal converts to any Scalar")
    }

    /// Conversion to `f64` for reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn two() -> Self {
        Self::of(2.0)
    }

    fn half() -> Self {
        Self::of(0.5)
    }
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum
        + fmt::Debug
        + fmt::Display
        + Default
        + 'static
{
}
