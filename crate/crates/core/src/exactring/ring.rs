//! Coefficient rings.
//!
//! A ring is a small context value; elements are plain data manipulated
//! through it. This keeps `Z/p^s` elements at eight bytes.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::modulus::Modulus;
use crate::error::{Error, Result};

pub trait Ring: Clone + Debug + PartialEq + Send + Sync {
    type Elem: Clone + Debug + PartialEq + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn from_bigint(&self, v: &BigInt) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    /// Inverse when `a` is a unit.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    /// Decimal rendering used by the canonical serialization.
    fn render(&self, a: &Self::Elem) -> String;
    /// Short description of the ring, e.g. `5^2`, `Z`, `Q`.
    fn label(&self) -> String;

    fn add_assign(&self, a: &mut Self::Elem, b: &Self::Elem) {
        *a = self.add(a, b);
    }

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut r = self.one();
        let mut b = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &b);
            }
            e >>= 1;
            if e > 0 {
                b = self.mul(&b, &b);
            }
        }
        r
    }

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem> {
        let bi = self
            .inv(b)
            .ok_or_else(|| Error::NotAUnit(self.render(b)))?;
        Ok(self.mul(a, &bi))
    }
}

/// `Z/p^s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Zmod(pub Modulus);

impl Zmod {
    pub fn new(p: u64, s: u32) -> Result<Self> {
        Ok(Zmod(Modulus::new(p, s)?))
    }

    pub fn modulus(&self) -> Modulus {
        self.0
    }

    pub fn reduce_bigint(&self, v: &BigInt) -> u64 {
        let m = BigInt::from(self.0.value());
        v.mod_floor(&m).to_u64().expect("reduced value fits")
    }

    /// Image of a `p`-integral rational.
    pub fn reduce_rational(&self, v: &BigRational) -> Result<u64> {
        let d = self.reduce_bigint(v.denom());
        let di = self
            .0
            .inv(d)
            .ok_or_else(|| Error::DivisionByP(format!("reducing {v} mod {}", self.0)))?;
        Ok(self.0.mul(self.reduce_bigint(v.numer()), di))
    }

    pub fn valuation(&self, a: &u64) -> u32 {
        self.0.valuation(*a)
    }
}

impl Ring for Zmod {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn from_i64(&self, v: i64) -> u64 {
        self.0.reduce_i64(v)
    }
    fn from_bigint(&self, v: &BigInt) -> u64 {
        self.reduce_bigint(v)
    }
    #[inline]
    fn add(&self, a: &u64, b: &u64) -> u64 {
        self.0.add(*a, *b)
    }
    #[inline]
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        self.0.sub(*a, *b)
    }
    #[inline]
    fn neg(&self, a: &u64) -> u64 {
        self.0.neg(*a)
    }
    #[inline]
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        self.0.mul(*a, *b)
    }
    #[inline]
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        self.0.inv(*a)
    }
    fn render(&self, a: &u64) -> String {
        a.to_string()
    }
    fn label(&self) -> String {
        self.0.label()
    }
    #[inline]
    fn add_assign(&self, a: &mut u64, b: &u64) {
        *a = self.0.add(*a, *b);
    }
    fn pow(&self, a: &u64, e: u64) -> u64 {
        self.0.pow(*a, e)
    }
}

/// The integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Integers;

impl Ring for Integers {
    type Elem = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::one()
    }
    fn from_i64(&self, v: i64) -> BigInt {
        BigInt::from(v)
    }
    fn from_bigint(&self, v: &BigInt) -> BigInt {
        v.clone()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn sub(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a - b
    }
    fn neg(&self, a: &BigInt) -> BigInt {
        -a
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }
    fn inv(&self, a: &BigInt) -> Option<BigInt> {
        (a.abs().is_one()).then(|| a.clone())
    }
    fn render(&self, a: &BigInt) -> String {
        a.to_string()
    }
    fn label(&self) -> String {
        "Z".into()
    }
    fn add_assign(&self, a: &mut BigInt, b: &BigInt) {
        *a += b;
    }
}

/// The rationals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Rationals;

impl Ring for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_bigint(&self, v: &BigInt) -> BigRational {
        BigRational::from_integer(v.clone())
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        (!a.is_zero()).then(|| a.recip())
    }
    fn render(&self, a: &BigRational) -> String {
        a.to_string()
    }
    fn label(&self) -> String {
        "Q".into()
    }
}

/// Dual numbers `R[e]/(e^2)`, used for exact first derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct Dual<R: Ring>(pub R);

impl<R: Ring> Dual<R> {
    pub fn lift(&self, a: R::Elem) -> (R::Elem, R::Elem) {
        (a, self.0.zero())
    }

    pub fn epsilon(&self) -> (R::Elem, R::Elem) {
        (self.0.zero(), self.0.one())
    }
}

impl<R: Ring> Ring for Dual<R> {
    type Elem = (R::Elem, R::Elem);

    fn zero(&self) -> Self::Elem {
        (self.0.zero(), self.0.zero())
    }
    fn one(&self) -> Self::Elem {
        (self.0.one(), self.0.zero())
    }
    fn from_i64(&self, v: i64) -> Self::Elem {
        (self.0.from_i64(v), self.0.zero())
    }
    fn from_bigint(&self, v: &BigInt) -> Self::Elem {
        (self.0.from_bigint(v), self.0.zero())
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        (self.0.add(&a.0, &b.0), self.0.add(&a.1, &b.1))
    }
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        (self.0.sub(&a.0, &b.0), self.0.sub(&a.1, &b.1))
    }
    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        (self.0.neg(&a.0), self.0.neg(&a.1))
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let r = &self.0;
        (
            r.mul(&a.0, &b.0),
            r.add(&r.mul(&a.0, &b.1), &r.mul(&a.1, &b.0)),
        )
    }
    fn is_zero(&self, a: &Self::Elem) -> bool {
        self.0.is_zero(&a.0) && self.0.is_zero(&a.1)
    }
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem> {
        let r = &self.0;
        let i = r.inv(&a.0)?;
        let d = r.neg(&r.mul(&a.1, &r.mul(&i, &i)));
        Some((i, d))
    }
    fn render(&self, a: &Self::Elem) -> String {
        format!("{}+{}e", self.0.render(&a.0), self.0.render(&a.1))
    }
    fn label(&self) -> String {
        format!("{}[e]", self.0.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_inverse() {
        let d = Dual(Rationals);
        let a = (Rationals.from_i64(3), Rationals.from_i64(5));
        let ai = d.inv(&a).unwrap();
        assert!(d.is_one(&d.mul(&a, &ai)));
    }

    #[test]
    fn rational_reduction() {
        let z = Zmod::new(5, 2).unwrap();
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(z.reduce_rational(&half).unwrap(), 13);
        let fifth = BigRational::new(1.into(), 5.into());
        assert!(z.reduce_rational(&fifth).is_err());
    }
}
