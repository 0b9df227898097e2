//! Sparse multivariate polynomials with terms kept in graded-lex order.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use super::ring::Ring;
use crate::error::{Error, Result};

/// Ordered variable names shared between polynomials.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarSet(Arc<[String]>);

impl VarSet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        VarSet(names.into_iter().map(Into::into).collect::<Vec<_>>().into())
    }

    /// `z_1, ..., z_n`.
    pub fn z(n: usize) -> Self {
        Self::new((1..=n).map(|i| format!("z_{i}")))
    }

    /// `z_1, ..., z_n, x`.
    pub fn zx(n: usize) -> Self {
        Self::new((1..=n).map(|i| format!("z_{i}")).chain(["x".to_string()]))
    }

    /// `t_1, ..., t_n`.
    pub fn t(n: usize) -> Self {
        Self::new((1..=n).map(|i| format!("t_{i}")))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|v| v == name)
    }

    pub fn without(&self, idx: usize) -> VarSet {
        VarSet::new(
            self.0
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != idx)
                .map(|(_, v)| v.clone()),
        )
    }
}

/// Exponent vector. Compared in graded-lex order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub SmallVec<[u16; 8]>);

impl Monomial {
    pub fn zeros(n: usize) -> Self {
        Monomial(SmallVec::from_elem(0, n))
    }

    pub fn from_slice(e: &[u16]) -> Self {
        Monomial(SmallVec::from_slice(e))
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn exps(&self) -> &[u16] {
        &self.0
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(o.0.iter()).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, o: &Monomial) -> bool {
        self.0.iter().zip(o.0.iter()).all(|(a, b)| a <= b)
    }
}

impl Ord for Monomial {
    fn cmp(&self, o: &Self) -> Ordering {
        self.degree()
            .cmp(&o.degree())
            .then_with(|| self.0.cmp(&o.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Restrict a variable to degrees `<= max` during multiplication.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cutoff {
    pub var: usize,
    pub max: u16,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparsePoly<R: Ring> {
    ring: R,
    vars: VarSet,
    terms: Vec<(Monomial, R::Elem)>,
}

impl<R: Ring> SparsePoly<R> {
    pub fn zero(ring: R, vars: VarSet) -> Self {
        SparsePoly {
            ring,
            vars,
            terms: Vec::new(),
        }
    }

    pub fn constant(ring: R, vars: VarSet, c: R::Elem) -> Self {
        let n = vars.len();
        Self::from_terms(ring, vars, [(Monomial::zeros(n), c)])
    }

    pub fn one(ring: R, vars: VarSet) -> Self {
        let c = ring.one();
        Self::constant(ring, vars, c)
    }

    pub fn var(ring: R, vars: VarSet, i: usize) -> Self {
        let mut m = Monomial::zeros(vars.len());
        m.0[i] = 1;
        let c = ring.one();
        Self::from_terms(ring, vars, [(m, c)])
    }

    /// `v_i - v_j`.
    pub fn diff(ring: R, vars: VarSet, i: usize, j: usize) -> Self {
        let a = Self::var(ring.clone(), vars.clone(), i);
        a.sub(&Self::var(ring, vars, j))
    }

    pub fn monomial(ring: R, vars: VarSet, exps: &[u16], c: R::Elem) -> Self {
        assert_eq!(exps.len(), vars.len());
        Self::from_terms(ring, vars, [(Monomial::from_slice(exps), c)])
    }

    /// Collects terms, merging repeated monomials and dropping zeros.
    pub fn from_terms(
        ring: R,
        vars: VarSet,
        terms: impl IntoIterator<Item = (Monomial, R::Elem)>,
    ) -> Self {
        let mut acc: FxHashMap<Monomial, R::Elem> = FxHashMap::default();
        for (m, c) in terms {
            debug_assert_eq!(m.0.len(), vars.len());
            match acc.get_mut(&m) {
                Some(e) => ring.add_assign(e, &c),
                None => {
                    acc.insert(m, c);
                }
            }
        }
        Self::from_map(ring, vars, acc)
    }

    fn from_map(ring: R, vars: VarSet, acc: FxHashMap<Monomial, R::Elem>) -> Self {
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !ring.is_zero(c)).collect();
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        SparsePoly { ring, vars, terms }
    }

    /// Assumes `terms` already sorted, distinct and non-zero.
    fn from_sorted(ring: R, vars: VarSet, terms: Vec<(Monomial, R::Elem)>) -> Self {
        SparsePoly { ring, vars, terms }
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> &[(Monomial, R::Elem)] {
        &self.terms
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.last().map(|(m, _)| m.degree())
    }

    pub fn degree_in(&self, var: usize) -> Option<u16> {
        self.terms.iter().map(|(m, _)| m.0[var]).max()
    }

    /// Coefficient of the monomial with the given exponents.
    pub fn coefficient(&self, exps: &[u16]) -> R::Elem {
        let m = Monomial::from_slice(exps);
        match self.terms.binary_search_by(|(t, _)| t.cmp(&m)) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => self.ring.zero(),
        }
    }

    pub fn constant_term(&self) -> R::Elem {
        self.coefficient(&vec![0; self.nvars()])
    }

    fn check_compat(&self, o: &Self) {
        assert_eq!(self.vars, o.vars, "polynomials over different variables");
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check_compat(o);
        let r = &self.ring;
        let mut out = Vec::with_capacity(self.terms.len() + o.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < o.terms.len() {
            match self.terms[i].0.cmp(&o.terms[j].0) {
                Ordering::Less => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(o.terms[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = r.add(&self.terms[i].1, &o.terms[j].1);
                    if !r.is_zero(&c) {
                        out.push((self.terms[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&o.terms[j..]);
        Self::from_sorted(self.ring.clone(), self.vars.clone(), out)
    }

    pub fn neg(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), self.ring.neg(c)))
            .collect();
        Self::from_sorted(self.ring.clone(), self.vars.clone(), terms)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &R::Elem) -> Self {
        let r = &self.ring;
        let terms = self
            .terms
            .iter()
            .map(|(m, a)| (m.clone(), r.mul(a, c)))
            .filter(|(_, a)| !r.is_zero(a))
            .collect();
        Self::from_sorted(r.clone(), self.vars.clone(), terms)
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.mul_cut(o, None)
    }

    pub fn mul_cut(&self, o: &Self, cutoff: Option<Cutoff>) -> Self {
        self.check_compat(o);
        let r = &self.ring;
        let mut acc: FxHashMap<Monomial, R::Elem> = FxHashMap::default();
        acc.reserve(self.terms.len().max(o.terms.len()) * 2);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                if let Some(cut) = cutoff {
                    if ma.0[cut.var] + mb.0[cut.var] > cut.max {
                        continue;
                    }
                }
                let m = ma.mul(mb);
                let c = r.mul(ca, cb);
                match acc.get_mut(&m) {
                    Some(e) => r.add_assign(e, &c),
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        Self::from_map(r.clone(), self.vars.clone(), acc)
    }

    /// Binary powering; the cutoff is applied after every multiplication.
    pub fn pow(&self, e: u64, cutoff: Option<Cutoff>) -> Self {
        let mut result = Self::one(self.ring.clone(), self.vars.clone()).truncate(cutoff);
        let mut base = self.truncate(cutoff);
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_cut(&base, cutoff);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_cut(&base, cutoff);
            }
        }
        result
    }

    pub fn truncate(&self, cutoff: Option<Cutoff>) -> Self {
        match cutoff {
            None => self.clone(),
            Some(c) => self.filter_terms(|m| m.0[c.var] <= c.max),
        }
    }

    /// Drops terms of total degree above `max`.
    pub fn truncate_total(&self, max: u32) -> Self {
        self.filter_terms(|m| m.degree() <= max)
    }

    pub fn filter_terms(&self, keep: impl Fn(&Monomial) -> bool) -> Self {
        let terms = self.terms.iter().filter(|(m, _)| keep(m)).cloned().collect();
        Self::from_sorted(self.ring.clone(), self.vars.clone(), terms)
    }

    /// Coefficient of `var^k`, as a polynomial in the remaining variables.
    pub fn coeff_of(&self, var: usize, k: u16) -> Self {
        let vars = self.vars.without(var);
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.0[var] == k)
            .map(|(m, c)| {
                let mut e = m.0.clone();
                e.remove(var);
                (Monomial(e), c.clone())
            });
        Self::from_terms(self.ring.clone(), vars, terms)
    }

    pub fn derivative(&self, var: usize) -> Self {
        let r = &self.ring;
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.0[var] > 0)
            .map(|(m, c)| {
                let mut e = m.clone();
                let k = e.0[var];
                e.0[var] -= 1;
                (e, r.mul(c, &r.from_i64(k as i64)))
            });
        Self::from_terms(r.clone(), self.vars.clone(), terms)
    }

    /// Multiply by `var^k`.
    pub fn shift(&self, var: usize, k: u16) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut e = m.clone();
                e.0[var] += k;
                (e, c.clone())
            })
            .collect();
        // multiplying by a monomial preserves the term order
        Self::from_sorted(self.ring.clone(), self.vars.clone(), terms)
    }

    pub fn eval(&self, point: &[R::Elem]) -> R::Elem {
        assert_eq!(point.len(), self.nvars());
        let r = &self.ring;
        let maxdeg: Vec<u16> = (0..self.nvars())
            .map(|v| self.degree_in(v).unwrap_or(0))
            .collect();
        let powers: Vec<Vec<R::Elem>> = point
            .iter()
            .zip(&maxdeg)
            .map(|(a, &d)| {
                let mut v = vec![r.one()];
                for k in 0..d as usize {
                    v.push(r.mul(&v[k], a));
                }
                v
            })
            .collect();
        let mut acc = r.zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = r.mul(&t, &powers[v][e as usize]);
                }
            }
            r.add_assign(&mut acc, &t);
        }
        acc
    }

    /// Substitutes values for some variables; those variables are removed.
    pub fn specialize(&self, values: &[(usize, R::Elem)]) -> Self {
        let r = &self.ring;
        let mut drop = vec![false; self.nvars()];
        for (v, _) in values {
            drop[*v] = true;
        }
        let names: Vec<String> = self
            .vars
            .names()
            .iter()
            .enumerate()
            .filter(|(i, _)| !drop[*i])
            .map(|(_, v)| v.clone())
            .collect();
        let terms = self.terms.iter().map(|(m, c)| {
            let mut t = c.clone();
            for (v, a) in values {
                t = r.mul(&t, &r.pow(a, m.0[*v] as u64));
            }
            let e: SmallVec<[u16; 8]> = m
                .0
                .iter()
                .enumerate()
                .filter(|(i, _)| !drop[*i])
                .map(|(_, &x)| x)
                .collect();
            (Monomial(e), t)
        });
        Self::from_terms(r.clone(), VarSet::new(names), terms)
    }

    pub fn map_ring<S: Ring>(&self, target: S, f: impl Fn(&R::Elem) -> S::Elem) -> SparsePoly<S> {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), f(c)));
        SparsePoly::from_terms(target, self.vars.clone(), terms)
    }

    pub fn try_map_ring<S: Ring>(
        &self,
        target: S,
        f: impl Fn(&R::Elem) -> Result<S::Elem>,
    ) -> Result<SparsePoly<S>> {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| Ok((m.clone(), f(c)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(SparsePoly::from_terms(target, self.vars.clone(), terms))
    }

    pub fn with_vars(&self, vars: VarSet) -> Self {
        assert_eq!(vars.len(), self.nvars());
        SparsePoly {
            ring: self.ring.clone(),
            vars,
            terms: self.terms.clone(),
        }
    }

    /// Re-embeds into a larger variable set; `map[k]` is the new index of variable `k`.
    pub fn embed(&self, vars: VarSet, map: &[usize]) -> Self {
        let n = vars.len();
        let terms = self.terms.iter().map(|(m, c)| {
            let mut e = Monomial::zeros(n);
            for (k, &x) in m.0.iter().enumerate() {
                e.0[map[k]] = x;
            }
            (e, c.clone())
        });
        Self::from_terms(self.ring.clone(), vars, terms)
    }

    /// Splits by the exponent of `var`: entry `k` holds the coefficient of `var^k`
    /// (still written in the full variable set, with that exponent zeroed).
    fn split_by(&self, var: usize) -> Vec<Self> {
        let d = self.degree_in(var).unwrap_or(0) as usize;
        let mut parts: Vec<Vec<(Monomial, R::Elem)>> = vec![Vec::new(); d + 1];
        for (m, c) in &self.terms {
            let mut e = m.clone();
            let k = e.0[var] as usize;
            e.0[var] = 0;
            parts[k].push((e, c.clone()));
        }
        parts
            .into_iter()
            .map(|t| Self::from_terms(self.ring.clone(), self.vars.clone(), t))
            .collect()
    }

    /// Exact division by `v_i - v_j`; `None` if there is a remainder.
    pub fn div_diff(&self, i: usize, j: usize) -> Option<Self> {
        if self.is_zero() {
            return Some(self.clone());
        }
        let parts = self.split_by(i);
        let d = parts.len() - 1;
        if d == 0 {
            return None;
        }
        let vj = Self::var(self.ring.clone(), self.vars.clone(), j);
        // P = sum P_k v_i^k = (v_i - v_j) sum Q_k v_i^k
        let mut q: Vec<Self> = vec![Self::zero(self.ring.clone(), self.vars.clone()); d];
        q[d - 1] = parts[d].clone();
        for k in (1..d).rev() {
            q[k - 1] = parts[k].add(&vj.mul(&q[k]));
        }
        if !parts[0].add(&vj.mul(&q[0])).is_zero() {
            return None;
        }
        let mut out = Self::zero(self.ring.clone(), self.vars.clone());
        for (k, qk) in q.iter().enumerate() {
            out = out.add(&qk.shift(i, k as u16));
        }
        Some(out)
    }

    /// `P(v + a)` truncated to total degree `<= max_degree`.
    pub fn translate(&self, shifts: &[R::Elem], max_degree: Option<u32>) -> Self {
        assert_eq!(shifts.len(), self.nvars());
        let r = &self.ring;
        let mut cur = self.clone();
        for (v, a) in shifts.iter().enumerate() {
            if r.is_zero(a) {
                continue;
            }
            let parts = cur.split_by(v);
            let x = Self::var(r.clone(), self.vars.clone(), v);
            let lin = x.add(&Self::constant(r.clone(), self.vars.clone(), a.clone()));
            // Horner in the shifted variable
            let mut acc = Self::zero(r.clone(), self.vars.clone());
            for part in parts.iter().rev() {
                acc = acc.mul(&lin).add(part);
            }
            cur = acc;
        }
        match max_degree {
            Some(d) => cur.truncate_total(d),
            None => cur,
        }
    }

    pub fn equals(&self, o: &Self) -> bool {
        self.vars == o.vars && self.terms == o.terms
    }
}

impl<R: Ring> fmt::Display for SparsePoly<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", self.ring.render(c))?;
            for (v, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*{}", self.vars.names()[v])?,
                    _ => write!(f, "*{}^{}", self.vars.names()[v], e)?,
                }
            }
        }
        Ok(())
    }
}

/// `f^e` with a degree cutoff applied at every multiplication.
pub fn poly_pow<R: Ring>(f: &SparsePoly<R>, e: u64, cutoff: Option<Cutoff>) -> SparsePoly<R> {
    f.pow(e, cutoff)
}

/// Coefficient of `var^k` as a polynomial in the other variables.
pub fn coeff_of<R: Ring>(p: &SparsePoly<R>, var: usize, k: u16) -> SparsePoly<R> {
    p.coeff_of(var, k)
}

/// Partial derivative with respect to `z_i` (1-based, as in the variable names).
pub fn d_dz<R: Ring>(p: &SparsePoly<R>, i: usize) -> Result<SparsePoly<R>> {
    let name = format!("z_{i}");
    let v = p
        .vars()
        .index_of(&name)
        .ok_or(Error::InvalidIndex(name))?;
    Ok(p.derivative(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactring::ring::{Integers, Zmod};
    use num_bigint::BigInt;

    fn f_poly() -> SparsePoly<Integers> {
        // (x - z_1)(x - z_2)(x - z_3)
        let vars = VarSet::zx(3);
        let x = SparsePoly::var(Integers, vars.clone(), 3);
        (0..3).fold(SparsePoly::one(Integers, vars.clone()), |acc, i| {
            acc.mul(&x.sub(&SparsePoly::var(Integers, vars.clone(), i)))
        })
    }

    #[test]
    fn cube_of_linear_product() {
        let f = f_poly();
        let f2 = f.pow(2, None);
        let x5 = f2.coeff_of(3, 5);
        // -2(z_1 + z_2 + z_3)
        assert_eq!(x5.nterms(), 3);
        assert_eq!(x5.coefficient(&[1, 0, 0]), BigInt::from(-2));
        let cut = f.pow(2, Some(Cutoff { var: 3, max: 2 }));
        assert!(cut.degree_in(3).unwrap() <= 2);
        assert!(cut.coeff_of(3, 2).equals(&f2.coeff_of(3, 2)));
    }

    #[test]
    fn derivative_of_monomial() {
        let vars = VarSet::z(2);
        let p = SparsePoly::monomial(Integers, vars, &[3, 2], BigInt::from(1));
        let d = d_dz(&p, 1).unwrap();
        assert_eq!(d.coefficient(&[2, 2]), BigInt::from(3));
        assert_eq!(d.nterms(), 1);
    }

    #[test]
    fn exact_division_by_difference() {
        let z = Zmod::new(5, 2).unwrap();
        let vars = VarSet::z(3);
        let d = SparsePoly::diff(z, vars.clone(), 0, 2);
        let q = SparsePoly::var(z, vars.clone(), 1)
            .pow(3, None)
            .add(&SparsePoly::constant(z, vars.clone(), 7));
        let p = d.mul(&q);
        assert!(p.div_diff(0, 2).unwrap().equals(&q));
        assert!(q.div_diff(0, 2).is_none());
    }

    #[test]
    fn translation_matches_evaluation() {
        let f = f_poly();
        let shifts: Vec<BigInt> = [2, -1, 5, 3].iter().map(|&v| BigInt::from(v)).collect();
        let g = f.translate(&shifts, None);
        let pt: Vec<BigInt> = [1, 4, -2, 7].iter().map(|&v| BigInt::from(v)).collect();
        let moved: Vec<BigInt> = pt.iter().zip(&shifts).map(|(a, b)| a + b).collect();
        assert_eq!(g.eval(&pt), f.eval(&moved));
    }
}
