//! Scalar abstraction for the kernel analytics.
//!
//! Everything in [`crate::kernel`] is written against [`Real`] so it can be
//! instantiated at `f32` or `f64`. The stochastic and geometric layers are
//! `f64` only.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only for types that cannot hold a
    /// finite `f64`, which no implementor does.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize fits in float")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
