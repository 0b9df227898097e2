//! Truncated multivariate power series in `t_1, ..., t_n`.

use super::poly::{Monomial, SparsePoly, VarSet};
use super::ring::Ring;
use crate::error::{Error, Result};

/// A series known exactly through total degree `cutoff`.
///
/// `precision` is the certified p-adic absolute precision of the
/// coefficients (`u32::MAX` when coefficients are exact).
#[derive(Clone, Debug, PartialEq)]
pub struct TruncSeries<R: Ring> {
    poly: SparsePoly<R>,
    cutoff: u32,
    precision: u32,
}

impl<R: Ring> TruncSeries<R> {
    pub fn new(poly: SparsePoly<R>, cutoff: u32) -> Self {
        TruncSeries {
            poly: poly.truncate_total(cutoff),
            cutoff,
            precision: u32::MAX,
        }
    }

    pub fn zero(ring: R, n: usize, cutoff: u32) -> Self {
        Self::new(SparsePoly::zero(ring, VarSet::t(n)), cutoff)
    }

    pub fn with_precision(mut self, precision: u32) -> Self {
        self.precision = precision;
        self
    }

    pub fn poly(&self) -> &SparsePoly<R> {
        &self.poly
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn ring(&self) -> &R {
        self.poly.ring()
    }

    pub fn nvars(&self) -> usize {
        self.poly.nvars()
    }

    pub fn coefficient(&self, exps: &[u16]) -> Result<R::Elem> {
        let d: u32 = exps.iter().map(|&e| e as u32).sum();
        if d > self.cutoff {
            return Err(Error::InsufficientTruncation(format!(
                "degree {d} beyond cutoff {}",
                self.cutoff
            )));
        }
        Ok(self.poly.coefficient(exps))
    }

    pub fn add(&self, o: &Self) -> Self {
        let c = self.cutoff.min(o.cutoff);
        TruncSeries {
            poly: self.poly.add(&o.poly).truncate_total(c),
            cutoff: c,
            precision: self.precision.min(o.precision),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        TruncSeries {
            poly: self.poly.neg(),
            ..self.clone()
        }
    }

    pub fn scale(&self, c: &R::Elem) -> Self {
        TruncSeries {
            poly: self.poly.scale(c),
            ..self.clone()
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let c = self.cutoff.min(o.cutoff);
        let a = self.poly.truncate_total(c);
        let b = o.poly.truncate_total(c);
        let r = self.ring();
        let mut terms = Vec::new();
        for (ma, ca) in a.terms() {
            let da = ma.degree();
            for (mb, cb) in b.terms() {
                if da + mb.degree() <= c {
                    terms.push((ma.mul(mb), r.mul(ca, cb)));
                }
            }
        }
        TruncSeries {
            poly: SparsePoly::from_terms(r.clone(), self.poly.vars().clone(), terms),
            cutoff: c,
            precision: self.precision.min(o.precision),
        }
    }

    /// Partial derivative; the result is certified one degree less.
    pub fn derivative(&self, var: usize) -> Self {
        TruncSeries {
            poly: self.poly.derivative(var),
            cutoff: self.cutoff.saturating_sub(1),
            precision: self.precision,
        }
    }

    /// Multiplicative inverse, defined when the constant term is a unit.
    pub fn inverse(&self) -> Result<Self> {
        let r = self.ring();
        let c0 = self.poly.constant_term();
        let c0i = r
            .inv(&c0)
            .ok_or_else(|| Error::NotAUnit(format!("constant term {}", r.render(&c0))))?;
        // 1/(c0 (1 + u)) = c0^{-1} sum (-u)^k
        let one = SparsePoly::one(r.clone(), self.poly.vars().clone());
        let u = TruncSeries::new(self.poly.scale(&c0i).sub(&one), self.cutoff);
        let mut acc = TruncSeries::new(one.clone(), self.cutoff);
        let mut power = acc.clone();
        let mu = u.neg();
        for _ in 0..self.cutoff {
            power = power.mul(&mu);
            if power.poly.is_zero() {
                break;
            }
            acc = acc.add(&power);
        }
        Ok(acc.scale(&c0i).with_precision(self.precision))
    }

    pub fn truncate(&self, cutoff: u32) -> Self {
        let c = cutoff.min(self.cutoff);
        TruncSeries {
            poly: self.poly.truncate_total(c),
            cutoff: c,
            precision: self.precision,
        }
    }

    /// Agreement through the common cutoff.
    pub fn agrees_with(&self, o: &Self) -> bool {
        let c = self.cutoff.min(o.cutoff);
        self.poly.truncate_total(c).equals(&o.poly.truncate_total(c))
    }

    pub fn terms(&self) -> &[(Monomial, R::Elem)] {
        self.poly.terms()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactring::ring::Zmod;

    #[test]
    fn inverse_roundtrip() {
        let z = Zmod::new(5, 2).unwrap();
        let vars = VarSet::t(2);
        let p = SparsePoly::constant(z, vars.clone(), 3)
            .add(&SparsePoly::var(z, vars.clone(), 0))
            .add(&SparsePoly::var(z, vars.clone(), 1).scale(&7));
        let s = TruncSeries::new(p, 6);
        let prod = s.mul(&s.inverse().unwrap());
        assert!(prod.agrees_with(&TruncSeries::new(SparsePoly::one(z, vars), 6)));
    }
}
