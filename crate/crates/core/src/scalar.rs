//! Scalar abstraction shared by every evaluator.
//!
//! All revenue arithmetic is generic over [`Scalar`], implemented for `f32`
//! and `f64`. The tolerances below are the ones every comparison in the crate
//! uses; they scale with the precision of the type.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type usable for revenue computations.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Allowed deviation of a distribution's total mass from one.
    const MASS_TOLERANCE: f64;
    /// Absolute tolerance for revenue identities and inequalities.
    const REVENUE_TOLERANCE: f64;

    /// Converts an `f64` literal. Every finite `f64` is representable (possibly rounded).
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize fits in a float")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    fn mass_tolerance() -> Self {
        Self::lit(Self::MASS_TOLERANCE)
    }

    fn revenue_tolerance() -> Self {
        Self::lit(Self::REVENUE_TOLERANCE)
    }
}

impl Scalar for f64 {
    const MASS_TOLERANCE: f64 = 1e-12;
    const REVENUE_TOLERANCE: f64 = 1e-9;
}

impl Scalar for f32 {
    const MASS_TOLERANCE: f64 = 1e-5;
    const REVENUE_TOLERANCE: f64 = 1e-4;
}
