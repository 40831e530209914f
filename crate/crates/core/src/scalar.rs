//! Scalar abstraction for the floating-point numerics.
//!
//! The dense linear algebra and every floating detector are written once
//! against [`Real`], so the same code runs in `f64` (the reference used by
//! the simulator) or `f32`.

use num_complex::Complex;
use num_traits::{Float, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

pub trait Real:
    'static
    + Send
    + Sync
    + Float
    + NumAssign
    + FromPrimitive
    + Default
    + Debug
    + Display
    + LowerExp
    + Sum
{
    /// Lossy conversion from an `f64` constant.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Conversion to `f64`, used when leaving the generic numerics.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`] scalar.
pub type Cx<T> = Complex<T>;

/// Squared magnitude without the square root.
#[inline]
pub fn norm_sqr<T: Real>(z: Cx<T>) -> T {
    z.re * z.re + z.im * z.im
}
