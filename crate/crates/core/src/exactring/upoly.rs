//! Dense univariate polynomials, used once the base point is specialized.

use super::poly::SparsePoly;
use super::ring::Ring;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct UniPoly<R: Ring> {
    ring: R,
    coeffs: Vec<R::Elem>,
}

impl<R: Ring> UniPoly<R> {
    pub fn new(ring: R, coeffs: Vec<R::Elem>) -> Self {
        let mut p = UniPoly { ring, coeffs };
        p.trim();
        p
    }

    pub fn zero(ring: R) -> Self {
        UniPoly {
            ring,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(ring: R, c: R::Elem) -> Self {
        Self::new(ring, vec![c])
    }

    pub fn monomial(ring: R, k: usize, c: R::Elem) -> Self {
        let mut v = vec![ring.zero(); k + 1];
        v[k] = c;
        Self::new(ring, v)
    }

    /// `x - a`.
    pub fn linear(ring: R, a: &R::Elem) -> Self {
        let c = vec![ring.neg(a), ring.one()];
        Self::new(ring, c)
    }

    /// From a polynomial in a single variable.
    pub fn from_sparse(p: &SparsePoly<R>) -> Self {
        assert_eq!(p.nvars(), 1);
        let r = p.ring().clone();
        let d = p.degree_in(0).unwrap_or(0) as usize;
        let mut v = vec![r.zero(); d + 1];
        for (m, c) in p.terms() {
            v[m.0[0] as usize] = c.clone();
        }
        Self::new(r, v)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| self.ring.is_zero(c)) {
            self.coeffs.pop();
        }
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn coeffs(&self) -> &[R::Elem] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: usize) -> R::Elem {
        self.coeffs.get(k).cloned().unwrap_or_else(|| self.ring.zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let v = (0..n).map(|k| self.ring.add(&self.coeff(k), &o.coeff(k))).collect();
        Self::new(self.ring.clone(), v)
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let v = (0..n).map(|k| self.ring.sub(&self.coeff(k), &o.coeff(k))).collect();
        Self::new(self.ring.clone(), v)
    }

    pub fn scale(&self, c: &R::Elem) -> Self {
        let v = self.coeffs.iter().map(|a| self.ring.mul(a, c)).collect();
        Self::new(self.ring.clone(), v)
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.ring.clone());
        }
        let r = &self.ring;
        let mut v = vec![r.zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if r.is_zero(a) {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                let t = r.mul(a, b);
                r.add_assign(&mut v[i + j], &t);
            }
        }
        Self::new(r.clone(), v)
    }

    /// Multiply by `x^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut v = vec![self.ring.zero(); k];
        v.extend(self.coeffs.iter().cloned());
        Self::new(self.ring.clone(), v)
    }

    pub fn derivative(&self) -> Self {
        let r = &self.ring;
        let v = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| r.mul(c, &r.from_i64(k as i64)))
            .collect();
        Self::new(r.clone(), v)
    }

    pub fn eval(&self, a: &R::Elem) -> R::Elem {
        let r = &self.ring;
        self.coeffs
            .iter()
            .rev()
            .fold(r.zero(), |acc, c| r.add(&r.mul(&acc, a), c))
    }

    /// Division with remainder by a divisor whose leading coefficient is a unit.
    pub fn div_rem(&self, d: &Self) -> Result<(Self, Self)> {
        let r = &self.ring;
        let dd = d.degree().ok_or_else(|| Error::NotAUnit("division by zero polynomial".into()))?;
        let lead_inv = r
            .inv(&d.coeffs[dd])
            .ok_or_else(|| Error::NotAUnit("leading coefficient of divisor".into()))?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Self::zero(r.clone()), self.clone()));
        }
        let mut q = vec![r.zero(); rem.len() - dd];
        for k in (dd..rem.len()).rev() {
            let c = r.mul(&rem[k], &lead_inv);
            if r.is_zero(&c) {
                continue;
            }
            for (j, b) in d.coeffs.iter().enumerate() {
                let t = r.mul(&c, b);
                rem[k - dd + j] = r.sub(&rem[k - dd + j], &t);
            }
            q[k - dd] = c;
        }
        rem.truncate(dd);
        Ok((Self::new(r.clone(), q), Self::new(r.clone(), rem)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactring::ring::Zmod;

    #[test]
    fn division() {
        let z = Zmod::new(7, 2).unwrap();
        let a = UniPoly::new(z, vec![5, 0, 3, 1]);
        let d = UniPoly::new(z, vec![2, 3]);
        let (q, r) = a.div_rem(&d).unwrap();
        assert_eq!(q.mul(&d).add(&r), a);
        assert!(r.degree().unwrap_or(0) < 1);
    }
}
