//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All dense algebra is written once against [`Scalar`] and instantiated for
//! `f32` and `f64`. Tolerance constants used by the tensor and solver code are
//! derived from the scalar's machine epsilon so single precision gets looser
//! checks automatically.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Real floating-point scalar usable by the FFT, the dense linear algebra and
/// the clustering routines.
pub trait Scalar:
    RealField + FftNum + FromPrimitive + ToPrimitive + Copy + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only if the value is not representable,
    /// which cannot happen for finite values and the two implementors.
    #[inline]
    fn lit(value: f64) -> Self {
        <Self as FromPrimitive>::from_f64(value).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(value: usize) -> Self {
        <Self as FromPrimitive>::from_usize(value).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Machine epsilon.
    fn epsilon() -> Self;

    #[inline]
    fn magnitude(self) -> Self {
        <Self as nalgebra::ComplexField>::abs(self)
    }

    #[inline]
    fn finite(self) -> bool {
        <Self as nalgebra::ComplexField>::is_finite(&self)
    }
}

impl Scalar for f32 {
    #[inline]
    fn epsilon() -> Self {
        f32::EPSILON
    }
}

impl Scalar for f64 {
    #[inline]
    fn epsilon() -> Self {
        f64::EPSILON
    }
}
