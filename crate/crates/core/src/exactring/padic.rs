//! Fixed-precision p-adic numbers with tracked absolute precision.
//!
//! A value is `p^val * unit` known modulo `p^(val + rel)`. Division by `p`
//! lowers the absolute precision; nothing is silently rounded.

use super::modulus::Modulus;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PAdicCtx {
    p: u64,
    /// Working precision: relative precision never exceeds this.
    width: u32,
    pows: [u64; 64],
}

impl PAdicCtx {
    pub fn new(p: u64, width: u32) -> Result<Self> {
        let m = Modulus::new(p, width)?;
        let mut pows = [0u64; 64];
        pows[0] = 1;
        for k in 1..=width as usize {
            pows[k] = pows[k - 1] * p;
        }
        let _ = m;
        Ok(PAdicCtx { p, width, pows })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    fn pk(&self, k: u32) -> u64 {
        self.pows[k as usize]
    }

    fn normalize(&self, mut val: i32, mut unit: u64, mut rel: u32) -> PAdic {
        if rel == 0 {
            return PAdic { val, unit: 0, rel: 0 };
        }
        unit %= self.pk(rel);
        if unit == 0 {
            // zero known modulo p^(val+rel)
            return PAdic {
                val: val + rel as i32,
                unit: 0,
                rel: 0,
            };
        }
        while unit % self.p == 0 {
            unit /= self.p;
            val += 1;
            rel -= 1;
        }
        PAdic { val, unit, rel }
    }

    /// An integer known to full working precision.
    pub fn from_i64(&self, v: i64) -> PAdic {
        let m = self.pk(self.width) as i128;
        let u = ((v as i128 % m + m) % m) as u64;
        self.normalize(0, u, self.width)
    }

    /// A residue mod `p^prec`, interpreted as an integer known to that precision.
    pub fn from_residue(&self, v: u64, prec: u32) -> PAdic {
        self.normalize(0, v, prec.min(self.width))
    }

    pub fn zero(&self) -> PAdic {
        PAdic {
            val: self.width as i32,
            unit: 0,
            rel: 0,
        }
    }

    pub fn add(&self, a: &PAdic, b: &PAdic) -> PAdic {
        let abs = a.abs_prec().min(b.abs_prec());
        let v = a.val.min(b.val);
        if abs <= v {
            return PAdic { val: abs, unit: 0, rel: 0 };
        }
        let rel = ((abs - v) as u32).min(self.width);
        let abs = v + rel as i32;
        let m = self.pk(rel) as u128;
        let lift = |x: &PAdic| -> u128 {
            if x.unit == 0 || x.val >= abs {
                0
            } else {
                (x.unit as u128 * self.pk((x.val - v) as u32) as u128) % m
            }
        };
        let u = ((lift(a) + lift(b)) % m) as u64;
        self.normalize(v, u, rel)
    }

    pub fn neg(&self, a: &PAdic) -> PAdic {
        if a.unit == 0 {
            return *a;
        }
        PAdic {
            val: a.val,
            unit: self.pk(a.rel) - a.unit,
            rel: a.rel,
        }
    }

    pub fn sub(&self, a: &PAdic, b: &PAdic) -> PAdic {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &PAdic, b: &PAdic) -> PAdic {
        if a.unit == 0 || b.unit == 0 {
            // a zero known mod p^v times p^w u is zero mod p^{v + w}
            return PAdic { val: a.val + b.val, unit: 0, rel: 0 };
        }
        let rel = a.rel.min(b.rel);
        let m = self.pk(rel) as u128;
        let u = ((a.unit as u128 % m) * (b.unit as u128 % m) % m) as u64;
        self.normalize(a.val + b.val, u, rel)
    }

    /// Division by a non-zero integer; the p-part lowers absolute precision.
    pub fn div_int(&self, a: &PAdic, d: i64) -> PAdic {
        assert_ne!(d, 0);
        let mut d_abs = d.unsigned_abs();
        let mut v = 0i32;
        while d_abs % self.p == 0 {
            d_abs /= self.p;
            v += 1;
        }
        let unit_d = if d < 0 { self.neg_unit(d_abs) } else { d_abs % self.pk(self.width) };
        if a.unit == 0 {
            return PAdic {
                val: a.val - v,
                unit: 0,
                rel: 0,
            };
        }
        let m = Modulus::new(self.p, a.rel).expect("rel within width");
        let inv = m.inv(unit_d % m.value()).expect("unit");
        PAdic {
            val: a.val - v,
            unit: m.mul(a.unit, inv),
            rel: a.rel,
        }
    }

    fn neg_unit(&self, x: u64) -> u64 {
        let m = self.pk(self.width);
        (m - x % m) % m
    }

    /// Residue modulo `p^s`; requires an integral value certified to `p^s`.
    pub fn to_residue(&self, a: &PAdic, s: u32) -> Result<u64> {
        if a.abs_prec() < s as i32 {
            return Err(Error::PrecisionExhausted {
                degree: 0,
                detail: format!("value known only to p^{}", a.abs_prec()),
            });
        }
        if a.unit == 0 {
            return Ok(0);
        }
        if a.val < 0 {
            return Err(Error::DivisionByP(format!("reducing a value of valuation {}", a.val)));
        }
        if a.val as u32 >= s {
            return Ok(0);
        }
        let m = self.pk(s) as u128;
        Ok((a.unit as u128 * self.pk(a.val as u32) as u128 % m) as u64)
    }

    /// `p^e * a` truncated to an integer residue modulo `p^k`.
    pub fn scaled_residue(&self, a: &PAdic, e: i32, k: u32) -> Result<u64> {
        let b = PAdic {
            val: a.val + e,
            unit: a.unit,
            rel: a.rel,
        };
        self.to_residue(&b, k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PAdic {
    val: i32,
    unit: u64,
    rel: u32,
}

impl PAdic {
    pub fn is_zero(&self) -> bool {
        self.unit == 0
    }

    /// Valuation; for a zero this is the absolute precision.
    pub fn valuation(&self) -> i32 {
        self.val
    }

    pub fn abs_prec(&self) -> i32 {
        self.val + self.rel as i32
    }

    pub fn unit(&self) -> u64 {
        self.unit
    }
}
