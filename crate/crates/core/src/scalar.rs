//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
///
/// Linear algebra goes through [`RealField`]; literal construction and
/// conversion to `f64` go through num-traits.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync
{
    /// Converts an `f64` literal. Out-of-range values saturate to infinity.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("real scalar converts to f64")
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        Self::lit(v as f64)
    }

    #[inline]
    fn infinity() -> Self {
        Self::lit(f64::INFINITY)
    }
}

impl Real for f32 {}
impl Real for f64 {}
