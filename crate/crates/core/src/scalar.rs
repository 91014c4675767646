//! Scalar abstraction for the numeric parts of the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point type usable for probability vectors and summary statistics.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Allowed deviation of a probability vector's sum from one.
    fn simplex_tolerance() -> Self;

    /// Converts from `f64`, rounding to the nearest representable value.
    fn of(value: f64) -> Self {
        Self::from_f64(value).unwrap_or_else(Self::nan)
    }

    fn of_usize(value: usize) -> Self {
        Self::from_usize(value).unwrap_or_else(Self::nan)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn simplex_tolerance() -> Self {
        1e-6
    }
}

// 53 f32 terms accumulate roughly 53 ulp of error; 1e-6 is below that.
impl Scalar for f32 {
    fn simplex_tolerance() -> Self {
        1e-5
    }
}
