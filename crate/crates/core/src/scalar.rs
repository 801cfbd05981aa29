//! Scalar abstraction shared by every analytic routine.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar the analytic code is written against: `f32` or `f64`.
///
/// Accuracy targets quoted in the docs (1e-12 and friends) apply to `f64`;
/// `f32` instantiations are accurate to a few ulps of single precision.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal must be representable")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count must be representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance floor: tight for `f64`, a few ulps above machine epsilon otherwise.
    #[inline]
    fn tol(target: f64) -> Self {
        Self::lit(target).max(Self::epsilon() * Self::lit(64.0))
    }

    /// `true` when the value is a whole number.
    #[inline]
    fn is_integer(self) -> bool {
        self.is_finite() && self.fract() == Self::zero()
    }

    /// `self^b`, using repeated multiplication when `b` is a small integer.
    #[inline]
    fn pow_real(self, b: Self) -> Self {
        if b.is_integer() && b.abs() <= Self::lit(16.0) {
            self.powi(b.to_i32().unwrap_or(0))
        } else {
            self.powf(b)
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}
