//! Complex scalar abstraction shared by binary64 and double-double evaluation.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::BigRational;

use crate::ddouble::{Dd, DdComplex};
use crate::jets::rational_to_f64;

pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_c64(c: Complex64) -> Self;
    /// Rounds when `Self` is binary64.
    fn from_dd(c: DdComplex) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn to_c64(self) -> Complex64;
    fn exp(self) -> Self;
    /// `Log(-z)`: cut along the positive real axis, real on the negative one.
    fn ln_axis(self) -> Self;
    fn is_finite(self) -> bool;

    fn zero() -> Self {
        Self::from_ratio(0, 1)
    }
    fn one() -> Self {
        Self::from_ratio(1, 1)
    }
    fn abs(self) -> f64 {
        self.to_c64().norm()
    }
}

/// `Log(-z)`: a logarithm of `z` up to the constant `iπ`, with the cut
/// along the positive real axis and real values on the negative one, so that
/// it commutes with conjugation.
pub fn ln_axis(z: Complex64) -> Complex64 {
    (-z).ln()
}

impl Scalar for Complex64 {
    fn from_c64(c: Complex64) -> Self {
        c
    }
    fn from_dd(c: DdComplex) -> Self {
        c.to_c64()
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }
    fn to_c64(self) -> Complex64 {
        self
    }
    fn exp(self) -> Self {
        Complex64::exp(self)
    }
    fn ln_axis(self) -> Self {
        ln_axis(self)
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl Scalar for DdComplex {
    fn from_c64(c: Complex64) -> Self {
        DdComplex::from_c64(c)
    }
    fn from_dd(c: DdComplex) -> Self {
        c
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        DdComplex::new(Dd::ratio(num, den), Dd::ZERO)
    }
    fn to_c64(self) -> Complex64 {
        DdComplex::to_c64(self)
    }
    fn exp(self) -> Self {
        DdComplex::exp(self)
    }
    fn ln_axis(self) -> Self {
        DdComplex::ln_axis(self)
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Nearest double-double to a rational.
pub fn dd_from_rational(q: &BigRational) -> Dd {
    let hi = rational_to_f64(q);
    match BigRational::from_float(hi) {
        Some(h) => Dd::new(hi) + Dd::new(rational_to_f64(&(q - h))),
        None => Dd::new(hi),
    }
}
