//! Residue rings `Z/p^s` for an odd prime `p`.
//!
//! All arithmetic is carried out on canonical representatives in `[0, p^s)`
//! stored in a `u64`; products go through `u128`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Largest admissible modulus is `2^BUDGET_BITS - 1`.
pub const BUDGET_BITS: u32 = 62;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// The modulus `p^s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Modulus {
    p: u64,
    s: u32,
    pk: u64,
}

impl Modulus {
    pub fn new(p: u64, s: u32) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(Error::InvalidModulus(format!("{p} is not an odd prime")));
        }
        if s == 0 {
            return Err(Error::InvalidModulus("exponent must be at least 1".into()));
        }
        let pk = p
            .checked_pow(s)
            .filter(|&v| v < (1u64 << BUDGET_BITS))
            .ok_or(Error::BudgetOverflow { p, s })?;
        Ok(Modulus { p, s, pk })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    /// `p^s` itself.
    pub fn value(&self) -> u64 {
        self.pk
    }

    pub fn with_exponent(&self, s: u32) -> Result<Self> {
        Modulus::new(self.p, s)
    }

    pub fn reduce_u64(&self, v: u64) -> u64 {
        v % self.pk
    }

    pub fn reduce_i64(&self, v: i64) -> u64 {
        let m = self.pk as i128;
        ((v as i128 % m + m) % m) as u64
    }

    pub fn reduce_i128(&self, v: i128) -> u64 {
        let m = self.pk as i128;
        ((v % m + m) % m) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.pk {
            s - self.pk
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.pk - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.pk - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.pk as u128) as u64
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1 % self.pk;
        a %= self.pk;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    pub fn is_unit(&self, a: u64) -> bool {
        a % self.p != 0
    }

    /// Inverse of a unit, `None` when `p | a`.
    pub fn inv(&self, a: u64) -> Option<u64> {
        let a = a % self.pk;
        if !self.is_unit(a) {
            return None;
        }
        let (mut r0, mut r1) = (self.pk as i128, a as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Some(self.reduce_i128(t0))
    }

    /// `v_p(a)`, capped at `s` for zero.
    pub fn valuation(&self, a: u64) -> u32 {
        let mut a = a % self.pk;
        if a == 0 {
            return self.s;
        }
        let mut v = 0;
        while a % self.p == 0 {
            a /= self.p;
            v += 1;
        }
        v
    }

    /// Symmetric representative in `(-p^s/2, p^s/2]`.
    pub fn signed(&self, a: u64) -> i64 {
        if a > self.pk / 2 {
            a as i64 - self.pk as i64
        } else {
            a as i64
        }
    }

    /// Exact division of `a` by `p^v`, assuming `p^v | a` as an integer.
    pub fn div_p_power(&self, a: u64, v: u32) -> u64 {
        a / self.p.pow(v)
    }

    pub fn label(&self) -> String {
        format!("{}^{}", self.p, self.s)
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.p, self.s)
    }
}

/// An element of `Z/p^s` carrying its modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Residue {
    value: u64,
    modulus: Modulus,
}

impl Residue {
    pub fn new(value: i64, modulus: Modulus) -> Self {
        Residue {
            value: modulus.reduce_i64(value),
            modulus,
        }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn is_unit(&self) -> bool {
        self.modulus.is_unit(self.value)
    }

    pub fn valuation(&self) -> u32 {
        self.modulus.valuation(self.value)
    }

    pub fn pow(&self, e: u64) -> Self {
        Residue {
            value: self.modulus.pow(self.value, e),
            modulus: self.modulus,
        }
    }

    pub fn inv(&self) -> Result<Self> {
        mod_inv(*self)
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.modulus, other.modulus, "residues modulo different p^s");
    }
}

/// Inverse in `Z/p^s`; fails when `p` divides the argument.
pub fn mod_inv(a: Residue) -> Result<Residue> {
    a.modulus
        .inv(a.value)
        .map(|value| Residue {
            value,
            modulus: a.modulus,
        })
        .ok_or(Error::NotAUnit(format!("{} mod {}", a.value, a.modulus)))
}

impl Add for Residue {
    type Output = Residue;
    fn add(self, o: Residue) -> Residue {
        self.check(&o);
        Residue {
            value: self.modulus.add(self.value, o.value),
            modulus: self.modulus,
        }
    }
}

impl Sub for Residue {
    type Output = Residue;
    fn sub(self, o: Residue) -> Residue {
        self.check(&o);
        Residue {
            value: self.modulus.sub(self.value, o.value),
            modulus: self.modulus,
        }
    }
}

impl Mul for Residue {
    type Output = Residue;
    fn mul(self, o: Residue) -> Residue {
        self.check(&o);
        Residue {
            value: self.modulus.mul(self.value, o.value),
            modulus: self.modulus,
        }
    }
}

impl Neg for Residue {
    type Output = Residue;
    fn neg(self) -> Residue {
        Residue {
            value: self.modulus.neg(self.value),
            modulus: self.modulus,
        }
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.value, self.modulus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_seven_mod_25() {
        let m = Modulus::new(5, 2).unwrap();
        assert_eq!(mod_inv(Residue::new(7, m)).unwrap().value(), 18);
        assert!(matches!(
            mod_inv(Residue::new(10, m)),
            Err(Error::NotAUnit(_))
        ));
    }

    #[test]
    fn budget() {
        assert!(Modulus::new(2, 1).is_err());
        assert!(Modulus::new(9, 1).is_err());
        assert!(matches!(
            Modulus::new(7, 30),
            Err(Error::BudgetOverflow { .. })
        ));
        assert!(Modulus::new(7, 22).is_ok());
    }

    #[test]
    fn valuation_and_sign() {
        let m = Modulus::new(5, 3).unwrap();
        assert_eq!(m.valuation(50), 2);
        assert_eq!(m.valuation(0), 3);
        assert_eq!(m.signed(124), -1);
    }
}
