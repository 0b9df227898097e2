//! Hasse-Witt matrix, ordinary points, and the generalized Cartier map
//! `C_s([P dx / y^{2k+1}])_l = coefficient of x^{l p^s - 1} in P f^{(p^s - 2k - 1)/2}`.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::derham::{connection_matrix, CurveData, FormRep};
use crate::error::{Error, Result};
use crate::exactring::binomial::linear_product_coefficient;
use crate::exactring::linalg::{adjugate, det_laplace, det_mod, Mat};
use crate::exactring::{DiagRational, Integers, Modulus, Ring, SparsePoly, UniPoly, Zmod};

/// `A_{lm} = coefficient of x^{lp - m} in f^{(p-1)/2}`, over the integers.
#[derive(Clone, Debug)]
pub struct HasseWittMatrix {
    pub p: u64,
    pub g: usize,
    pub entries: Mat<SparsePoly<Integers>>,
}

pub fn hasse_witt(p: u64, g: usize) -> Result<HasseWittMatrix> {
    Modulus::new(p, 1)?;
    if g == 0 {
        return Err(Error::InvalidIndex("genus must be at least 1".into()));
    }
    let n = 2 * g + 1;
    let m = ((p - 1) / 2) as u32;
    let exps = vec![m; n];
    let entries = (1..=g)
        .map(|l| {
            (1..=g)
                .map(|col| {
                    let deg = l as i64 * p as i64 - col as i64;
                    if deg < 0 {
                        SparsePoly::zero(Integers, crate::exactring::VarSet::z(n))
                    } else {
                        linear_product_coefficient(&Integers, &exps, deg as u32)
                    }
                })
                .collect()
        })
        .collect();
    Ok(HasseWittMatrix { p, g, entries })
}

impl HasseWittMatrix {
    /// Entries reduced mod `p` at a point.
    pub fn eval_mod_p(&self, point: &[u64]) -> Mat<u64> {
        let z = Zmod::new(self.p, 1).expect("checked prime");
        let pt: Vec<u64> = point.iter().map(|&a| a % self.p).collect();
        self.entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| e.map_ring(z, |c| z.reduce_bigint(c)).eval(&pt))
                    .collect()
            })
            .collect()
    }

    pub fn det_mod_p(&self, point: &[u64]) -> u64 {
        let m = Modulus::new(self.p, 1).expect("checked prime");
        det_mod(&m, &self.eval_mod_p(point))
    }

    /// `det A` as a polynomial over the integers.
    pub fn det(&self) -> SparsePoly<Integers> {
        let ring = PolyRing(self.entries[0][0].vars().clone());
        det_laplace(&ring, &self.entries)
    }
}

/// Polynomials over the integers as a ring, only used for determinants.
#[derive(Clone, Debug, PartialEq)]
struct PolyRing(crate::exactring::VarSet);

impl Ring for PolyRing {
    type Elem = SparsePoly<Integers>;
    fn zero(&self) -> Self::Elem {
        SparsePoly::zero(Integers, self.0.clone())
    }
    fn one(&self) -> Self::Elem {
        SparsePoly::one(Integers, self.0.clone())
    }
    fn from_i64(&self, v: i64) -> Self::Elem {
        SparsePoly::constant(Integers, self.0.clone(), Integers.from_i64(v))
    }
    fn from_bigint(&self, v: &num_bigint::BigInt) -> Self::Elem {
        SparsePoly::constant(Integers, self.0.clone(), v.clone())
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.add(b)
    }
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.sub(b)
    }
    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        a.neg()
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.mul(b)
    }
    fn is_zero(&self, a: &Self::Elem) -> bool {
        a.is_zero()
    }
    fn inv(&self, _a: &Self::Elem) -> Option<Self::Elem> {
        None
    }
    fn render(&self, a: &Self::Elem) -> String {
        a.to_string()
    }
    fn label(&self) -> String {
        "Z[z]".into()
    }
}

/// Rejects points with colliding residues or a non-unit Hasse-Witt determinant.
pub fn check_point(p: u64, g: usize, point: &[u64]) -> Result<()> {
    let n = 2 * g + 1;
    if point.len() != n {
        return Err(Error::InvalidPoint(format!("expected {n} coordinates, got {}", point.len())));
    }
    for i in 0..n {
        for j in 0..i {
            if point[i] % p == point[j] % p {
                return Err(Error::NonInvertibleDifference { i: j + 1, j: i + 1 });
            }
        }
    }
    if hasse_witt(p, g)?.det_mod_p(point) == 0 {
        return Err(Error::InvalidPoint(format!("det A vanishes mod {p}: not ordinary")));
    }
    Ok(())
}

pub const MAX_SAMPLE_TRIES: usize = 1000;

/// `count` ordinary points with coordinates in `[0, bound)`, by seeded rejection sampling.
pub fn sample_ordinary_points(p: u64, g: usize, count: usize, bound: u64, seed: u64) -> Result<Vec<Vec<u64>>> {
    let n = 2 * g + 1;
    let hw = hasse_witt(p, g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count {
        if tries >= MAX_SAMPLE_TRIES {
            return Err(Error::InvalidPoint(format!(
                "no ordinary point found for p = {p}, g = {g} in {MAX_SAMPLE_TRIES} tries"
            )));
        }
        tries += 1;
        let pt: Vec<u64> = (0..n).map(|_| rng.gen_range(0..bound)).collect();
        let distinct = (0..n).all(|i| (0..i).all(|j| pt[i] % p != pt[j] % p));
        if distinct && hw.det_mod_p(&pt) != 0 {
            out.push(pt);
            tries = 0;
        }
    }
    Ok(out)
}

/// Row `l`, column `i`: coefficient of `x^{l p^s - 1}` in `f^{(p^s-1)/2} / (x - z_i)`,
/// i.e. `C_s([w_i])`, as polynomials mod `p^s`.
#[derive(Clone, Debug)]
pub struct CartierMatrix {
    pub p: u64,
    pub s: u32,
    pub g: usize,
    pub ring: Zmod,
    pub rows: Mat<SparsePoly<Zmod>>,
}

/// Built from the expansion of `(x - z_i)^{m-1} prod_{k != i} (x - z_k)^m`,
/// independently of the division used for the hypergeometric solutions.
pub fn cartier_matrix(p: u64, s: u32, g: usize) -> Result<CartierMatrix> {
    let ring = Zmod::new(p, s)?;
    let q = ring.modulus().value();
    let n = 2 * g + 1;
    if q < n as u64 {
        return Err(Error::DegenerateRegime(format!("p^s = {q} < 2g + 1 = {n}")));
    }
    let m = ((q - 1) / 2) as u32;
    let rows = (1..=g)
        .map(|l| {
            (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut exps = vec![m; n];
                    exps[i] = m - 1;
                    linear_product_coefficient(&ring, &exps, (l as u64 * q - 1) as u32)
                })
                .collect()
        })
        .collect();
    Ok(CartierMatrix { p, s, g, ring, rows })
}

impl CartierMatrix {
    pub fn eval(&self, point: &[u64]) -> Mat<u64> {
        let q = self.ring.modulus().value();
        let pt: Vec<u64> = point.iter().map(|&a| a % q).collect();
        self.rows
            .iter()
            .map(|row| row.iter().map(|e| e.eval(&pt)).collect())
            .collect()
    }
}

/// `C_s` of `P dx / y^{2k+1}` at a point: `g` residues mod `p^s`.
pub fn cartier_form(ring: &Zmod, g: usize, point: &[u64], form: &FormRep<Zmod>) -> Result<Vec<u64>> {
    let q = ring.modulus().value();
    let twok1 = 2 * form.k as u64 + 1;
    if twok1 > q {
        return Err(Error::Shape(format!("pole order {twok1} exceeds p^s = {q}")));
    }
    let e = (q - twok1) / 2;
    let f = point.iter().fold(UniPoly::constant(*ring, 1), |acc, a| {
        acc.mul(&UniPoly::linear(*ring, &ring.modulus().reduce_u64(*a)))
    });
    let h = upoly_pow(&f, e).mul(&form.numerator);
    Ok((1..=g).map(|l| h.coeff((l as u64 * q - 1) as usize)).collect())
}

fn upoly_pow<R: Ring>(f: &UniPoly<R>, mut e: u64) -> UniPoly<R> {
    let mut base = f.clone();
    let mut acc = UniPoly::constant(f.ring().clone(), f.ring().one());
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

/// The `g x n` matrix of `C_s([w_i])` at a point, from the specialized forms.
pub fn cartier_matrix_at(p: u64, s: u32, g: usize, point: &[u64]) -> Result<Mat<u64>> {
    let ring = Zmod::new(p, s)?;
    let pt: Vec<u64> = point.iter().map(|&a| ring.modulus().reduce_u64(a)).collect();
    let f = pt.iter().fold(UniPoly::constant(ring, 1), |acc, a| acc.mul(&UniPoly::linear(ring, a)));
    let cols = (0..pt.len())
        .map(|i| {
            let (cof, _) = f.div_rem(&UniPoly::linear(ring, &pt[i]))?;
            cartier_form(&ring, g, &pt, &FormRep::new(cof, 1))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..g).map(|l| cols.iter().map(|c| c[l]).collect()).collect())
}

/// Kernel of `C_s` on `(Z/p^s)^{n-1}` (coordinates in `[w_1..w_{n-1}]`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelBasis {
    pub modulus: Modulus,
    pub pivots: Vec<usize>,
    /// `n - 1 - g` vectors; vector `t` has a 1 in its free column.
    pub basis: Mat<u64>,
}

pub fn kernel_cs(p: u64, s: u32, g: usize, point: &[u64]) -> Result<KernelBasis> {
    check_point(p, g, point)?;
    let c = cartier_matrix_at(p, s, g, point)?;
    let m = Modulus::new(p, s)?;
    let n = 2 * g + 1;
    let mut a: Mat<u64> = c.iter().map(|r| r[..n - 1].to_vec()).collect();
    let cols = n - 1;
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == g {
            break;
        }
        let Some(r) = (row..g).find(|&r| m.is_unit(a[r][col])) else {
            continue;
        };
        a.swap(row, r);
        let inv = m.inv(a[row][col]).expect("unit");
        for x in a[row].iter_mut() {
            *x = m.mul(*x, inv);
        }
        for r2 in 0..g {
            if r2 != row && a[r2][col] != 0 {
                let f = a[r2][col];
                for k in 0..cols {
                    a[r2][k] = m.sub(a[r2][k], m.mul(f, a[row][k]));
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if pivots.len() < g {
        return Err(Error::NotOnto(format!(
            "C_s has no unit {g}x{g} minor mod {} at {point:?}",
            m.label()
        )));
    }
    let basis = (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![0u64; cols];
            v[free] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = m.neg(a[r][free]);
            }
            v
        })
        .collect();
    Ok(KernelBasis {
        modulus: m,
        pivots,
        basis,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatnessReport {
    pub p: u64,
    pub s: u32,
    pub g: usize,
    /// `(i, kernel vector, row)` triples where `C_s (nabla_i kappa)` is nonzero mod `p^s`.
    pub failures: Vec<(usize, usize, usize)>,
    pub pass: bool,
}

/// Symbolic check that the Gauss-Manin connection maps `ker C_s` into itself
/// mod `p^s`. The kernel vectors are `(-adj(B) F e_t, det(B) e_t)` for the
/// split `C = [B | F]` into the first `g` and remaining `g` columns.
pub fn kernel_flatness(p: u64, s: u32, g: usize) -> Result<FlatnessReport> {
    let cm = cartier_matrix(p, s, g)?;
    let ring = cm.ring;
    let n = 2 * g + 1;
    let pr = ZPoly(ring, crate::exactring::VarSet::z(n));
    let b: Mat<SparsePoly<Zmod>> = cm.rows.iter().map(|r| r[..g].to_vec()).collect();
    let f: Mat<SparsePoly<Zmod>> = cm.rows.iter().map(|r| r[g..n - 1].to_vec()).collect();
    let adj = adjugate(&pr, &b);
    let det = det_laplace(&pr, &b);
    if det.is_zero() {
        return Err(Error::NotOnto("leading g x g block of C_s vanishes identically".into()));
    }
    let kappas: Vec<Vec<SparsePoly<Zmod>>> = (0..n - 1 - g)
        .map(|t| {
            let mut v = vec![pr.zero(); n - 1];
            for r in 0..g {
                let mut acc = pr.zero();
                for k in 0..g {
                    acc = acc.add(&adj[r][k].mul(&f[k][t]));
                }
                v[r] = acc.neg();
            }
            v[g + t] = det.clone();
            v
        })
        .collect();
    let failures: Vec<(usize, usize, usize)> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<Vec<(usize, usize, usize)>> {
            let conn = connection_matrix(&ring, n, i)?;
            let mut bad = Vec::new();
            for (t, kappa) in kappas.iter().enumerate() {
                // nabla_i (sum_j kappa_j [w_j]) = sum_k (d_i kappa_k + sum_j kappa_j conn_jk) [w_k]
                let nabla: Vec<DiagRational<Zmod>> = (0..n - 1)
                    .map(|k| {
                        let mut acc = DiagRational::from_poly(kappa[k].derivative(i));
                        for j in 0..n - 1 {
                            acc = acc.add(&conn[j][k].mul_poly(&kappa[j]));
                        }
                        acc
                    })
                    .collect();
                for (l, row) in cm.rows.iter().enumerate() {
                    let mut acc = DiagRational::zero(ring, n);
                    for k in 0..n - 1 {
                        acc = acc.add(&nabla[k].mul_poly(&row[k]));
                    }
                    if !acc.reduce().is_zero() {
                        bad.push((i, t, l));
                    }
                }
            }
            Ok(bad)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(FlatnessReport {
        p,
        s,
        g,
        pass: failures.is_empty(),
        failures,
    })
}

/// Polynomials mod `p^s` as a ring, for adjugates of polynomial matrices.
#[derive(Clone, Debug, PartialEq)]
struct ZPoly(Zmod, crate::exactring::VarSet);

impl Ring for ZPoly {
    type Elem = SparsePoly<Zmod>;
    fn zero(&self) -> Self::Elem {
        SparsePoly::zero(self.0, self.1.clone())
    }
    fn one(&self) -> Self::Elem {
        SparsePoly::one(self.0, self.1.clone())
    }
    fn from_i64(&self, v: i64) -> Self::Elem {
        SparsePoly::constant(self.0, self.1.clone(), self.0.from_i64(v))
    }
    fn from_bigint(&self, v: &num_bigint::BigInt) -> Self::Elem {
        SparsePoly::constant(self.0, self.1.clone(), self.0.from_bigint(v))
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.add(b)
    }
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.sub(b)
    }
    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        a.neg()
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.mul(b)
    }
    fn is_zero(&self, a: &Self::Elem) -> bool {
        a.is_zero()
    }
    fn inv(&self, _a: &Self::Elem) -> Option<Self::Elem> {
        None
    }
    fn render(&self, a: &Self::Elem) -> String {
        a.to_string()
    }
    fn label(&self) -> String {
        format!("Z/{}[z]", self.0.modulus().label())
    }
}

/// Exact forms `d(x^a y)` and `d(x^a / y)`, `0 <= a <= 2g + 1`, must map to zero.
pub fn exact_forms_vanish(p: u64, s: u32, g: usize, point: &[u64]) -> Result<bool> {
    let ring = Zmod::new(p, s)?;
    let pt: Vec<u64> = point.iter().map(|&a| ring.modulus().reduce_u64(a)).collect();
    let curve = CurveData::new(ring, pt.clone())?;
    for a in 0..=2 * g + 1 {
        for b in [1, -1] {
            let img = cartier_form(&ring, g, &pt, &curve.exact_form(a, b))?;
            if img.iter().any(|&v| v != 0) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Mod `p`: the image of `[x^{m-1} dx/y]`, written through its coordinates in
/// `[w_1..w_{n-1}]` and the columns of `C_1`, is column `m` of `A`.
pub fn holomorphic_hasse_witt(p: u64, g: usize, point: &[u64]) -> Result<bool> {
    let ring = Zmod::new(p, 1)?;
    let n = 2 * g + 1;
    let pt: Vec<u64> = point.iter().map(|&a| a % p).collect();
    let curve = CurveData::new(ring, pt.clone())?;
    let c = cartier_matrix_at(p, 1, g, &pt)?;
    let a = hasse_witt(p, g)?.eval_mod_p(&pt);
    for col in 0..g {
        let cls = curve.reduce(&FormRep::new(UniPoly::monomial(ring, col, 1), 0))?;
        for l in 0..g {
            let mut acc = 0u64;
            for j in 0..n - 1 {
                acc = ring.add(&acc, &ring.mul(&cls.coeffs[j], &c[l][j]));
            }
            if acc != a[l][col] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactring::VarSet;
    use crate::hypersol::q_solutions;

    #[test]
    fn hasse_witt_small_cases() {
        let hw = hasse_witt(3, 1).unwrap();
        let want = SparsePoly::var(Integers, VarSet::z(3), 0)
            .add(&SparsePoly::var(Integers, VarSet::z(3), 1))
            .add(&SparsePoly::var(Integers, VarSet::z(3), 2))
            .neg();
        assert!(hw.entries[0][0].equals(&want));
        let hw5 = hasse_witt(5, 1).unwrap();
        assert_eq!(hw5.eval_mod_p(&[0, 1, 2]), vec![vec![3]]);
    }

    #[test]
    fn rows_match_hypergeometric_solutions() {
        for (p, s, g) in [(5, 1, 1), (5, 2, 1), (7, 1, 2)] {
            let cm = cartier_matrix(p, s, g).unwrap();
            let qs = q_solutions(p, s, g).unwrap();
            for (row, q) in cm.rows.iter().zip(&qs.vectors) {
                for (a, b) in row.iter().zip(q.entries()) {
                    assert!(a.equals(b));
                }
            }
        }
    }

    #[test]
    fn kernel_at_small_point() {
        let k = kernel_cs(5, 1, 1, &[0, 1, 2]).unwrap();
        assert_eq!(k.basis.len(), 1);
        assert_eq!(k.pivots, vec![0]);
        // C row (4, 0, 1) restricted to (4, 0)
        assert_eq!(k.basis[0], vec![0, 1]);
    }

    #[test]
    fn no_ordinary_points_for_p5_genus2() {
        assert!(sample_ordinary_points(5, 2, 1, 25, 1).is_err());
    }

    #[test]
    fn exact_and_holomorphic() {
        assert!(exact_forms_vanish(7, 2, 2, &[0, 1, 2, 3, 4]).unwrap());
        assert!(holomorphic_hasse_witt(7, 2, &[0, 1, 2, 3, 4]).unwrap());
        assert!(holomorphic_hasse_witt(5, 1, &[0, 1, 2]).unwrap());
    }
}
