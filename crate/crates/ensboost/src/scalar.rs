//! Scalar abstraction for the numeric kernels.
//!
//! Everything numeric in this crate is written against [`Scalar`] so the
//! same kernels run in `f32` or `f64`; the pipeline itself instantiates
//! [`crate::Real`] (`f64`).

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, Signed, ToPrimitive};

pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Signed
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`, for constants and RNG draws.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant not representable")
    }

    /// Widening conversion to `f64`, for serialization and reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
