//! Floating-point scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point number usable by the retrofit model, the annualization
/// helpers and the simplex solver: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal, rounding to the nearest representable value.
    fn lit(v: f64) -> Self;

    /// Widening conversion used for reporting and file output.
    fn to_f64_lossless(self) -> f64;
}

impl Scalar for f32 {
    #[inline]
    fn lit(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn to_f64_lossless(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    #[inline]
    fn lit(v: f64) -> Self {
        v
    }

    #[inline]
    fn to_f64_lossless(self) -> f64 {
        self
    }
}

/// Relative closeness test `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn close<T: Scalar>(a: T, b: T, tol: T) -> bool {
    let scale = T::one().max(a.abs()).max(b.abs());
    (a - b).abs() <= tol * scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_conversion() {
        assert_eq!(<f64 as Scalar>::lit(0.35), 0.35);
        assert_eq!(<f32 as Scalar>::lit(0.5), 0.5f32);
        assert_eq!(1.5f32.to_f64_lossless(), 1.5);
    }

    #[test]
    fn closeness_is_relative_above_one() {
        assert!(close(1.0e6, 1.0e6 + 0.5, 1e-6));
        assert!(!close(1.0, 1.1, 1e-3));
        assert!(close(0.0f32, 1e-7, 1e-6));
    }
}
