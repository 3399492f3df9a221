//! Minimal algebraic traits shared by every coefficient type in the crate.
//!
//! The methods take references and return owned values so that big-number
//! backed types never need to be cloned just to be combined.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Exact rational number.
pub type Rational = BigRational;

/// Commutative ring with identity.
pub trait Ring: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;

    fn from_i64(v: i64) -> Self {
        let mut acc = Self::zero();
        let unit = if v < 0 { Self::one().neg() } else { Self::one() };
        for _ in 0..v.unsigned_abs() {
            acc = acc.add(&unit);
        }
        acc
    }

    fn is_one(&self) -> bool {
        *self == Self::one()
    }

    /// `self^e` for a non-negative exponent, by repeated squaring.
    fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

/// A ring in which every nonzero element is invertible.
pub trait Field: Ring {
    /// Multiplicative inverse; `None` exactly for zero.
    fn inv(&self) -> Option<Self>;

    fn div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|i| self.mul(&i))
    }
}

impl Ring for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn is_one(&self) -> bool {
        One::is_one(self)
    }
}

impl Field for Rational {
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
}

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Plain-text rendering: `3`, `-2/5`.
pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Dual numbers `a + b·ε` with `ε² = 0`; exact first derivatives by forward mode.
#[derive(Clone, PartialEq, Debug)]
pub struct Dual<F: Field> {
    pub re: F,
    pub eps: F,
}

impl<F: Field> Dual<F> {
    pub fn new(re: F, eps: F) -> Self {
        Dual { re, eps }
    }
    pub fn constant(re: F) -> Self {
        Dual { re, eps: F::zero() }
    }
}

impl<F: Field> Ring for Dual<F> {
    fn zero() -> Self {
        Dual::constant(F::zero())
    }
    fn one() -> Self {
        Dual::constant(F::one())
    }
    fn add(&self, o: &Self) -> Self {
        Dual::new(self.re.add(&o.re), self.eps.add(&o.eps))
    }
    fn sub(&self, o: &Self) -> Self {
        Dual::new(self.re.sub(&o.re), self.eps.sub(&o.eps))
    }
    fn mul(&self, o: &Self) -> Self {
        Dual::new(
            self.re.mul(&o.re),
            self.re.mul(&o.eps).add(&self.eps.mul(&o.re)),
        )
    }
    fn neg(&self) -> Self {
        Dual::new(self.re.neg(), self.eps.neg())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.eps.is_zero()
    }
    fn from_i64(v: i64) -> Self {
        Dual::constant(F::from_i64(v))
    }
}

impl<F: Field> Field for Dual<F> {
    fn inv(&self) -> Option<Self> {
        let r = self.re.inv()?;
        let e = self.eps.mul(&r).mul(&r).neg();
        Some(Dual::new(r, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_pow_and_inverse() {
        assert_eq!(rat(2, 3).pow(3), rat(8, 27));
        assert_eq!(int(0).inv(), None);
        assert_eq!(rat(-2, 7).inv().unwrap(), rat(-7, 2));
        assert_eq!(<Rational as Ring>::from_i64(-4), int(-4));
    }

    #[test]
    fn dual_numbers_differentiate_products() {
        // d/dx (x^3 + 2x) at x = 2 is 14.
        let x = Dual::new(int(2), int(1));
        let f = x.pow(3).add(&x.mul(&Dual::from_i64(2)));
        assert_eq!(f.re, int(12));
        assert_eq!(f.eps, int(14));
        let g = x.inv().unwrap();
        assert_eq!(g.eps, rat(-1, 4));
    }
}
