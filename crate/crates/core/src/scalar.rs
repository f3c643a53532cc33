//! Scalar abstraction shared by the polynomial, linear-algebra and sequence
//! code.
//!
//! Three families implement [`Scalar`]: IEEE floats (`f32`, `f64`), the exact
//! field [`Rat`], and [`Fixed`], a binary fixed-point real with
//! [`FRAC_BITS`] fractional bits for recurrences that amplify rounding error
//! faster than a double can absorb.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::Rat;

pub trait Scalar:
    Clone
    + PartialOrd
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_rat(r: &Rat) -> Self;

    fn to_f64(&self) -> f64;

    fn from_i64(n: i64) -> Self {
        Self::from_rat(&Rat::from_integer(BigInt::from(n)))
    }

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn is_negative_val(&self) -> bool {
        *self < Self::zero()
    }

    fn add_ref(&self, rhs: &Self) -> Self {
        self.clone() + rhs.clone()
    }

    fn sub_ref(&self, rhs: &Self) -> Self {
        self.clone() - rhs.clone()
    }

    fn mul_ref(&self, rhs: &Self) -> Self {
        self.clone() * rhs.clone()
    }

    /// `self^n` by repeated squaring.
    fn powu(&self, mut n: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base.clone();
            }
            n >>= 1;
            if n > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

impl Scalar for f64 {
    fn from_rat(r: &Rat) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn from_rat(r: &Rat) -> Self {
        ToPrimitive::to_f32(r).unwrap_or(f32::NAN)
    }
    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }
}

impl Scalar for Rat {
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
}

/// Number of fractional bits carried by [`Fixed`].
pub const FRAC_BITS: u64 = 256;

/// Fixed-point real `mantissa / 2^FRAC_BITS`.
///
/// Multiplication and division truncate toward negative infinity, so each
/// operation loses at most one unit in the last place.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fixed(BigInt);

impl Fixed {
    pub fn from_mantissa(m: BigInt) -> Self {
        Fixed(m)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.0
    }

    pub fn to_rat(&self) -> Rat {
        Rat::new(self.0.clone(), BigInt::one() << FRAC_BITS)
    }

    /// One unit in the last place, `2^-FRAC_BITS`.
    pub fn ulp() -> Self {
        Fixed(BigInt::one())
    }
}

impl fmt::Debug for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fixed({:e})", self.to_f64())
    }
}

impl fmt::Display for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

impl Zero for Fixed {
    fn zero() -> Self {
        Fixed(BigInt::zero())
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for Fixed {
    fn one() -> Self {
        Fixed(BigInt::one() << FRAC_BITS)
    }
}

impl Add for Fixed {
    type Output = Fixed;
    fn add(self, rhs: Fixed) -> Fixed {
        Fixed(self.0 + rhs.0)
    }
}

impl Sub for Fixed {
    type Output = Fixed;
    fn sub(self, rhs: Fixed) -> Fixed {
        Fixed(self.0 - rhs.0)
    }
}

impl Mul for Fixed {
    type Output = Fixed;
    fn mul(self, rhs: Fixed) -> Fixed {
        Fixed((self.0 * rhs.0) >> FRAC_BITS)
    }
}

impl Div for Fixed {
    type Output = Fixed;
    fn div(self, rhs: Fixed) -> Fixed {
        assert!(!rhs.0.is_zero(), "Fixed division by zero");
        let num = self.0 << FRAC_BITS;
        Fixed(num_integer::Integer::div_floor(&num, &rhs.0))
    }
}

impl Neg for Fixed {
    type Output = Fixed;
    fn neg(self) -> Fixed {
        Fixed(-self.0)
    }
}

impl Scalar for Fixed {
    fn from_rat(r: &Rat) -> Self {
        let num = r.numer() << FRAC_BITS;
        Fixed(num_integer::Integer::div_floor(&num, r.denom()))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(&self.to_rat()).unwrap_or(f64::NAN)
    }

    fn abs_val(&self) -> Self {
        Fixed(self.0.abs())
    }
}
