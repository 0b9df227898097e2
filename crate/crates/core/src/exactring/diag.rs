//! Rational functions in `z` whose denominators are products of the
//! differences `z_i - z_j` and the Hasse-Witt determinant.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::poly::{SparsePoly, VarSet};
use super::ring::Ring;
use crate::error::{Error, Result};

/// An allowed denominator factor. `Diff(i, j)` is `z_i - z_j` with `i < j` (0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Factor {
    Diff(u16, u16),
    DetA,
}

#[derive(Clone, Debug)]
pub struct DiagRational<R: Ring> {
    num: SparsePoly<R>,
    den: BTreeMap<Factor, u32>,
    det: Option<Arc<SparsePoly<R>>>,
}

impl<R: Ring> DiagRational<R> {
    pub fn from_poly(p: SparsePoly<R>) -> Self {
        DiagRational {
            num: p,
            den: BTreeMap::new(),
            det: None,
        }
    }

    pub fn zero(ring: R, n: usize) -> Self {
        Self::from_poly(SparsePoly::zero(ring, VarSet::z(n)))
    }

    pub fn constant(ring: R, n: usize, c: R::Elem) -> Self {
        Self::from_poly(SparsePoly::constant(ring, VarSet::z(n), c))
    }

    /// `1 / (z_i - z_j)` for 0-based `i != j`.
    pub fn inv_diff(ring: R, n: usize, i: usize, j: usize) -> Self {
        assert_ne!(i, j);
        let (a, b, sign) = if i < j { (i, j, false) } else { (j, i, true) };
        let one = ring.one();
        let c = if sign { ring.neg(&one) } else { one };
        let mut r = Self::constant(ring, n, c);
        r.den.insert(Factor::Diff(a as u16, b as u16), 1);
        r
    }

    /// `1 / det`, where `det` is the determinant polynomial in `z`.
    pub fn inv_det(det: Arc<SparsePoly<R>>) -> Self {
        let mut r = Self::from_poly(SparsePoly::one(det.ring().clone(), det.vars().clone()));
        r.den.insert(Factor::DetA, 1);
        r.det = Some(det);
        r
    }

    pub fn numerator(&self) -> &SparsePoly<R> {
        &self.num
    }

    pub fn denominator(&self) -> &BTreeMap<Factor, u32> {
        &self.den
    }

    pub fn ring(&self) -> &R {
        self.num.ring()
    }

    pub fn n(&self) -> usize {
        self.num.nvars()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn merged_det(&self, o: &Self) -> Option<Arc<SparsePoly<R>>> {
        match (&self.det, &o.det) {
            (Some(a), Some(b)) => {
                debug_assert!(Arc::ptr_eq(a, b) || a.equals(b));
                Some(a.clone())
            }
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (None, None) => None,
        }
    }

    pub fn factor_poly(&self, f: Factor) -> SparsePoly<R> {
        factor_poly(f, self.ring(), self.n(), self.det.as_deref())
    }

    fn times_factors(&self, p: &SparsePoly<R>, extra: &BTreeMap<Factor, u32>) -> SparsePoly<R> {
        let mut out = p.clone();
        for (&f, &e) in extra {
            if e > 0 {
                let fp = self.factor_poly(f);
                for _ in 0..e {
                    out = out.mul(&fp);
                }
            }
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut tmp = self.clone();
        tmp.det = self.merged_det(o);
        let mut den = self.den.clone();
        for (&f, &e) in &o.den {
            let v = den.entry(f).or_insert(0);
            *v = (*v).max(e);
        }
        let missing = |have: &BTreeMap<Factor, u32>| -> BTreeMap<Factor, u32> {
            den.iter()
                .map(|(&f, &e)| (f, e - have.get(&f).copied().unwrap_or(0)))
                .filter(|(_, e)| *e > 0)
                .collect()
        };
        let a = tmp.times_factors(&self.num, &missing(&self.den));
        let b = tmp.times_factors(&o.num, &missing(&o.den));
        DiagRational {
            num: a.add(&b),
            den,
            det: tmp.det,
        }
    }

    pub fn neg(&self) -> Self {
        DiagRational {
            num: self.num.neg(),
            den: self.den.clone(),
            det: self.det.clone(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut den = self.den.clone();
        for (&f, &e) in &o.den {
            *den.entry(f).or_insert(0) += e;
        }
        DiagRational {
            num: self.num.mul(&o.num),
            den,
            det: self.merged_det(o),
        }
    }

    pub fn mul_poly(&self, p: &SparsePoly<R>) -> Self {
        DiagRational {
            num: self.num.mul(p),
            den: self.den.clone(),
            det: self.det.clone(),
        }
    }

    pub fn scale(&self, c: &R::Elem) -> Self {
        DiagRational {
            num: self.num.scale(c),
            den: self.den.clone(),
            det: self.det.clone(),
        }
    }

    /// Divide by `z_i - z_j` (0-based, any order).
    pub fn div_diff(&self, i: usize, j: usize) -> Self {
        self.mul(&Self::inv_diff(self.ring().clone(), self.n(), i, j))
    }

    /// Partial derivative in `z_i` (0-based).
    pub fn d_dz(&self, i: usize) -> Self {
        let dnum = self.num.derivative(i);
        let active: Vec<(Factor, u32, SparsePoly<R>, SparsePoly<R>)> = self
            .den
            .iter()
            .filter(|(_, &e)| e > 0)
            .filter_map(|(&f, &e)| {
                let fp = self.factor_poly(f);
                let df = fp.derivative(i);
                (!df.is_zero()).then_some((f, e, fp, df))
            })
            .collect();
        if active.is_empty() {
            return DiagRational {
                num: dnum,
                den: self.den.clone(),
                det: self.det.clone(),
            };
        }
        let all = active
            .iter()
            .fold(SparsePoly::one(self.ring().clone(), self.num.vars().clone()), |acc, a| {
                acc.mul(&a.2)
            });
        let mut num = dnum.mul(&all);
        let r = self.ring();
        for (k, (_, e, _, df)) in active.iter().enumerate() {
            let mut others = SparsePoly::one(r.clone(), self.num.vars().clone());
            for (l, a) in active.iter().enumerate() {
                if l != k {
                    others = others.mul(&a.2);
                }
            }
            let term = self.num.mul(df).mul(&others).scale(&r.from_i64(*e as i64));
            num = num.sub(&term);
        }
        let mut den = self.den.clone();
        for (f, ..) in &active {
            *den.get_mut(f).unwrap() += 1;
        }
        DiagRational {
            num,
            den,
            det: self.det.clone(),
        }
    }

    /// Cancels difference factors that divide the numerator.
    pub fn reduce(&self) -> Self {
        let mut out = self.clone();
        let keys: Vec<Factor> = out.den.keys().copied().collect();
        for f in keys {
            if let Factor::Diff(i, j) = f {
                while out.den[&f] > 0 {
                    match out.num.div_diff(i as usize, j as usize) {
                        Some(q) => {
                            out.num = q;
                            *out.den.get_mut(&f).unwrap() -= 1;
                        }
                        None => break,
                    }
                }
            }
        }
        out.den.retain(|_, e| *e > 0);
        out
    }

    /// Value at a point of the base.
    pub fn eval(&self, point: &[R::Elem]) -> Result<R::Elem> {
        let r = self.ring();
        let mut d = r.one();
        for (&f, &e) in &self.den {
            let v = match f {
                Factor::Diff(i, j) => r.sub(&point[i as usize], &point[j as usize]),
                Factor::DetA => self
                    .det
                    .as_ref()
                    .ok_or_else(|| Error::Shape("det factor without determinant".into()))?
                    .eval(point),
            };
            let vi = r.inv(&v).ok_or(match f {
                Factor::Diff(i, j) => Error::NonInvertibleDifference {
                    i: i as usize + 1,
                    j: j as usize + 1,
                },
                Factor::DetA => Error::DetNotUnit,
            })?;
            d = r.mul(&d, &r.pow(&vi, e as u64));
        }
        Ok(r.mul(&self.num.eval(point), &d))
    }

    pub fn map_ring<S: Ring>(&self, target: S, f: impl Fn(&R::Elem) -> S::Elem) -> DiagRational<S> {
        DiagRational {
            num: self.num.map_ring(target.clone(), &f),
            den: self.den.clone(),
            det: self
                .det
                .as_ref()
                .map(|d| Arc::new(d.map_ring(target.clone(), &f))),
        }
    }
}

pub fn factor_poly<R: Ring>(f: Factor, ring: &R, n: usize, det: Option<&SparsePoly<R>>) -> SparsePoly<R> {
    match f {
        Factor::Diff(i, j) => SparsePoly::diff(ring.clone(), VarSet::z(n), i as usize, j as usize),
        Factor::DetA => det.expect("det factor without determinant").clone(),
    }
}

impl<R: Ring> fmt::Display for DiagRational<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.num)?;
        for (&fac, &e) in &self.den {
            match fac {
                Factor::Diff(i, j) => write!(f, " / (z_{}-z_{})^{}", i + 1, j + 1, e)?,
                Factor::DetA => write!(f, " / det^{e}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactring::ring::{Rationals, Ring};
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(v: i64) -> BigRational {
        Rationals.from_i64(v)
    }

    #[test]
    fn partial_fractions_sum() {
        // 1/(z1-z2) + 1/(z2-z1) = 0
        let a = DiagRational::inv_diff(Rationals, 3, 0, 1);
        let b = DiagRational::inv_diff(Rationals, 3, 1, 0);
        assert!(a.add(&b).is_zero());
    }

    #[test]
    fn derivative_matches_finite_formula() {
        // d/dz1 of z3/(z1-z2)^2 = -2 z3/(z1-z2)^3
        let n = 3;
        let num = SparsePoly::var(Rationals, VarSet::z(n), 2);
        let a = DiagRational::inv_diff(Rationals, n, 0, 1);
        let f = a.mul(&a).mul_poly(&num);
        let d = f.d_dz(0);
        let pt = [q(5), q(2), q(7)];
        let want = q(-2) * q(7) / q(27);
        assert_eq!(d.eval(&pt).unwrap(), want);
        let d3 = f.d_dz(2);
        assert_eq!(d3.eval(&pt).unwrap(), q(1) / q(9));
    }

    #[test]
    fn reduce_cancels() {
        let n = 2;
        let diff = SparsePoly::diff(Rationals, VarSet::z(n), 0, 1);
        let f = DiagRational::inv_diff(Rationals, n, 0, 1).mul_poly(&diff.mul(&diff));
        let r = f.reduce();
        assert!(r.denominator().is_empty());
        assert!(r.numerator().equals(&diff));
        let _ = BigInt::from(0);
    }
}
