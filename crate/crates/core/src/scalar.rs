//! Scalar backends: double precision floats and exact rationals.

use core::fmt::Debug;
use core::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

/// Exact rational numbers with arbitrary precision.
pub type Rational = BigRational;

/// Field elements the generic linear algebra runs on.
///
/// `is_negligible` is the zero test: exact for rationals (the tolerance is
/// ignored), absolute for floats.
pub trait Scalar: Clone + Debug + PartialEq + Num + Neg<Output = Self> {
    const EXACT: bool;

    fn from_rational(q: &Rational) -> Self;
    fn from_i64(v: i64) -> Self;
    /// Picks the representation matching the backend from a rational and its
    /// precomputed float image.
    fn from_cached(q: &Rational, approx: f64) -> Self;
    fn is_negligible(&self, tol: f64) -> bool;
    /// Absolute value as a float, used for pivot selection and residuals.
    fn magnitude(&self) -> f64;
    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(q: &Rational) -> Self {
        ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_cached(_q: &Rational, approx: f64) -> Self {
        approx
    }

    fn is_negligible(&self, tol: f64) -> bool {
        num_traits::Float::abs(*self) <= tol
    }

    fn magnitude(&self) -> f64 {
        num_traits::Float::abs(*self)
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn from_cached(q: &Rational, _approx: f64) -> Self {
        q.clone()
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn magnitude(&self) -> f64 {
        ToPrimitive::to_f64(&self.abs()).unwrap_or(f64::INFINITY)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// `p/q` as a rational. Panics when `q == 0`.
pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}
