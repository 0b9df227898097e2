//! The hyperelliptic KZ system `2 d_i I - H_i I = 0` on vectors with
//! vanishing coordinate sum.

use crate::error::{Error, Result};
use crate::exactring::modulus::Residue;
use crate::exactring::ring::{Ring, Zmod};
use crate::exactring::{DiagRational, SparsePoly, TruncSeries};

/// Entries a KZ vector may hold.
pub trait KzEntry: Clone {
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn is_zero(&self) -> bool;
}

/// Entries that can be divided by `z_i - z_j`.
pub trait DivDiff: KzEntry {
    fn div_diff(&self, i: usize, j: usize) -> Result<Self>;
}

impl<R: Ring> KzEntry for SparsePoly<R> {
    fn add(&self, o: &Self) -> Self {
        SparsePoly::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        SparsePoly::sub(self, o)
    }
    fn is_zero(&self) -> bool {
        SparsePoly::is_zero(self)
    }
}

impl<R: Ring> KzEntry for DiagRational<R> {
    fn add(&self, o: &Self) -> Self {
        DiagRational::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        DiagRational::sub(self, o)
    }
    fn is_zero(&self) -> bool {
        DiagRational::is_zero(self)
    }
}

impl<R: Ring> DivDiff for DiagRational<R> {
    fn div_diff(&self, i: usize, j: usize) -> Result<Self> {
        Ok(DiagRational::div_diff(self, i, j))
    }
}

impl<R: Ring> KzEntry for TruncSeries<R> {
    fn add(&self, o: &Self) -> Self {
        TruncSeries::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        TruncSeries::sub(self, o)
    }
    fn is_zero(&self) -> bool {
        self.poly().is_zero()
    }
}

impl KzEntry for Residue {
    fn add(&self, o: &Self) -> Self {
        *self + *o
    }
    fn sub(&self, o: &Self) -> Self {
        *self - *o
    }
    fn is_zero(&self) -> bool {
        self.value() == 0
    }
}

/// A vector `(I_1, ..., I_n)` with `sum I_j = 0`.
#[derive(Clone, Debug)]
pub struct KzVector<E: KzEntry> {
    entries: Vec<E>,
}

impl<E: KzEntry> KzVector<E> {
    pub fn new(entries: Vec<E>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Shape("empty KZ vector".into()));
        }
        let total = entries[1..].iter().fold(entries[0].clone(), |a, b| a.add(b));
        if !total.is_zero() {
            return Err(Error::SumNotZero);
        }
        Ok(KzVector { entries })
    }

    /// Skips the invariant check; used for intermediate results such as residuals.
    pub(crate) fn new_unchecked(entries: Vec<E>) -> Self {
        KzVector { entries }
    }

    pub fn entries(&self) -> &[E] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<E> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(KzEntry::is_zero)
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        let n = self.len();
        if i == j || i >= n || j >= n {
            return Err(Error::InvalidIndex(format!("pair ({}, {}) for n = {n}", i + 1, j + 1)));
        }
        Ok(())
    }
}

/// `Omega_ij v` (0-based indices): `(v_j - v_i)` in slot `i`, `(v_i - v_j)` in slot `j`.
pub fn omega_apply<E: KzEntry>(i: usize, j: usize, v: &KzVector<E>) -> Result<KzVector<E>> {
    v.check_pair(i, j)?;
    let zero = v.entries[0].sub(&v.entries[0]);
    let mut out = vec![zero; v.len()];
    out[i] = v.entries[j].sub(&v.entries[i]);
    out[j] = v.entries[i].sub(&v.entries[j]);
    Ok(KzVector::new_unchecked(out))
}

/// The Gaudin Hamiltonian `H_i = sum_{j != i} Omega_ij / (z_i - z_j)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GaudinOperator {
    pub n: usize,
    /// 0-based.
    pub i: usize,
}

impl GaudinOperator {
    pub fn new(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::InvalidIndex(format!("H_{} for n = {n}", i + 1)));
        }
        Ok(GaudinOperator { n, i })
    }

    pub fn apply<E: DivDiff>(&self, v: &KzVector<E>) -> Result<KzVector<E>> {
        gaudin_apply(self.i, v)
    }

    /// Matrix of `H_i` with entries `1/(z_i - z_j)` combinations.
    pub fn matrix<R: Ring>(&self, ring: &R) -> Vec<Vec<DiagRational<R>>> {
        let n = self.n;
        let i = self.i;
        let zero = DiagRational::zero(ring.clone(), n);
        let mut m = vec![vec![zero.clone(); n]; n];
        for j in (0..n).filter(|&j| j != i) {
            let inv = DiagRational::inv_diff(ring.clone(), n, i, j);
            m[j][i] = m[j][i].add(&inv);
            m[j][j] = m[j][j].sub(&inv);
            m[i][j] = m[i][j].add(&inv);
            m[i][i] = m[i][i].sub(&inv);
        }
        m
    }
}

/// `H_i v` (0-based `i`).
pub fn gaudin_apply<E: DivDiff>(i: usize, v: &KzVector<E>) -> Result<KzVector<E>> {
    let n = v.len();
    if i >= n {
        return Err(Error::InvalidIndex(format!("H_{} for n = {n}", i + 1)));
    }
    let e = &v.entries;
    let zero = e[0].sub(&e[0]);
    let mut out = vec![zero.clone(); n];
    let mut acc = zero;
    for j in (0..n).filter(|&j| j != i) {
        let t = e[i].sub(&e[j]).div_diff(i, j)?;
        acc = acc.sub(&t);
        out[j] = t;
    }
    out[i] = acc;
    Ok(KzVector::new_unchecked(out))
}

/// `2 d_i I - H_i I`, entrywise.
pub fn kz_residual<R: Ring>(
    v: &KzVector<DiagRational<R>>,
    i: usize,
) -> Result<KzVector<DiagRational<R>>> {
    let h = gaudin_apply(i, v)?;
    let two = v.entries[0].ring().from_i64(2);
    let out = v
        .entries
        .iter()
        .zip(h.entries())
        .map(|(e, he)| e.d_dz(i).scale(&two).sub(he).reduce())
        .collect();
    Ok(KzVector::new_unchecked(out))
}

/// Residual for every `i`, computed in parallel.
pub fn kz_residuals<R: Ring>(v: &KzVector<DiagRational<R>>) -> Result<Vec<KzVector<DiagRational<R>>>> {
    use rayon::prelude::*;
    (0..v.len()).into_par_iter().map(|i| kz_residual(v, i)).collect()
}

/// Least p-adic valuation among numerator coefficients; `None` for the zero vector.
pub fn residual_valuation(v: &KzVector<DiagRational<Zmod>>) -> Option<u32> {
    v.entries
        .iter()
        .flat_map(|e| {
            let ring = *e.ring();
            e.numerator()
                .terms()
                .iter()
                .map(move |(_, c)| ring.valuation(c))
                .collect::<Vec<_>>()
        })
        .min()
}

/// Lift a vector of polynomials into rational functions.
pub fn poly_vector<R: Ring>(entries: Vec<SparsePoly<R>>) -> Result<KzVector<DiagRational<R>>> {
    KzVector::new(entries.into_iter().map(DiagRational::from_poly).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactring::linalg::mat_mul;
    use crate::exactring::{Rationals, VarSet};

    fn basis(n: usize, k: usize) -> KzVector<DiagRational<Rationals>> {
        let e = (0..n)
            .map(|j| {
                let c = if j == k {
                    1
                } else if j == (k + 1) % n {
                    -1
                } else {
                    0
                };
                DiagRational::constant(Rationals, n, Rationals.from_i64(c))
            })
            .collect();
        KzVector::new(e).unwrap()
    }

    #[test]
    fn omega_preserves_sum_zero() {
        let n = 4;
        let v = basis(n, 1);
        let w = omega_apply(1, 3, &v).unwrap();
        assert!(KzVector::new(w.into_entries()).is_ok());
        assert!(omega_apply(2, 2, &v).is_err());
    }

    #[test]
    fn hamiltonians_commute() {
        let n = 4;
        for k in 0..n {
            let v = basis(n, k);
            for i in 0..n {
                for j in 0..i {
                    let a = gaudin_apply(i, &gaudin_apply(j, &v).unwrap()).unwrap();
                    let b = gaudin_apply(j, &gaudin_apply(i, &v).unwrap()).unwrap();
                    for (x, y) in a.entries().iter().zip(b.entries()) {
                        assert!(x.sub(y).reduce().is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn matrix_agrees_with_apply() {
        let n = 3;
        let h = GaudinOperator::new(n, 1).unwrap();
        let m = h.matrix(&Rationals);
        let v = basis(n, 0);
        let direct = h.apply(&v).unwrap();
        for (row, want) in m.iter().zip(direct.entries()) {
            let mut acc = DiagRational::zero(Rationals, n);
            for (a, b) in row.iter().zip(v.entries()) {
                acc = acc.add(&a.mul(b));
            }
            assert!(acc.sub(want).is_zero());
        }
        let _ = mat_mul::<Rationals>;
    }

    #[test]
    fn sum_zero_enforced() {
        let z = Zmod::new(5, 1).unwrap();
        let one = SparsePoly::one(z, VarSet::z(2));
        assert!(matches!(
            poly_vector(vec![one.clone(), one]),
            Err(Error::SumNotZero)
        ));
    }
}
