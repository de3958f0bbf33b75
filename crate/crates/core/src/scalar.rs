//! Scalar abstractions.
//!
//! Operator assembly only needs a commutative ring with exact small-integer
//! ratios, so it runs over [`Scalar`] (floats and big rationals alike).
//! Anything that needs `sqrt`, `powf` or transcendental functions runs over
//! [`Real`], which is implemented for `f32` and `f64`.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, Num, Signed, ToPrimitive};

/// Ring-like scalar used by stencil assembly, moment tests and certificates.
pub trait Scalar:
    Clone + Debug + Display + PartialEq + PartialOrd + Num + Signed + Send + Sync + 'static
{
    fn from_int(v: i64) -> Self;

    /// Exact `num / den` for rationals, correctly rounded for floats.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Lossy conversion used for reporting and for handing exact results to
    /// floating-point code.
    fn to_f64(&self) -> f64;

    /// Relative tolerance for "structurally zero" checks such as row sums:
    /// zero for exact types, a few hundred ulps for floats.
    fn rounding_tolerance() -> Self;
}

/// Floating-point scalar.
pub trait Real: Scalar + Float + FloatConst {
    fn from_f64(v: f64) -> Self;
}

macro_rules! float_scalar {
    ($($t:ty),*) => {$(
        impl Scalar for $t {
            #[inline]
            fn from_int(v: i64) -> Self {
                v as $t
            }

            #[inline]
            fn from_ratio(num: i64, den: i64) -> Self {
                num as $t / den as $t
            }

            #[inline]
            fn to_f64(&self) -> f64 {
                *self as f64
            }

            #[inline]
            fn rounding_tolerance() -> Self {
                256.0 * <$t>::EPSILON
            }
        }

        impl Real for $t {
            #[inline]
            fn from_f64(v: f64) -> Self {
                v as $t
            }
        }
    )*};
}

float_scalar!(f32, f64);

impl Scalar for BigRational {
    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            self.numer().to_f64().unwrap_or(f64::NAN) / self.denom().to_f64().unwrap_or(f64::NAN)
        })
    }

    fn rounding_tolerance() -> Self {
        BigRational::from_integer(BigInt::from(0))
    }
}

/// Converts a float into the exact rational it represents.
pub fn rational_from_f64(v: f64) -> Option<BigRational> {
    BigRational::from_float(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios_are_exact_for_rationals() {
        let third = BigRational::from_ratio(1, 3);
        let sum = third.clone() + third.clone() + third;
        assert_eq!(sum, BigRational::from_int(1));
    }

    #[test]
    fn float_ratio() {
        assert_eq!(<f64 as Scalar>::from_ratio(1, 4), 0.25);
        assert_eq!(<f32 as Scalar>::from_ratio(-3, 2), -1.5);
    }

    #[test]
    fn rational_to_f64() {
        assert_eq!(Scalar::to_f64(&BigRational::from_ratio(-7, 8)), -0.875);
        assert_eq!(rational_from_f64(0.375), Some(BigRational::from_ratio(3, 8)));
    }
}
