//! p-curvature of connections `nabla_i = d_i + B_i` on column vectors mod `p`:
//! `psi_i = B_i^{(p)}` with `B^{(1)} = B`, `B^{(k+1)} = d_i B^{(k)} + B B^{(k)}`.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::derham::{connection_matrix, CurveData, FormRep};
use crate::error::{Error, Result};
use crate::exactring::linalg::{rank_mod_p, transpose, Mat};
use crate::exactring::{DiagRational, Modulus, Monomial, Ring, SparsePoly, UniPoly, VarSet, Zmod};
use crate::hypersol::q_solutions;
use crate::kzsystem::GaudinOperator;

pub const MAX_PRIME: u64 = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConnectionKind {
    Kz,
    GaussManin,
    Scalar,
}

/// Matrices `B_1..B_n` over `F_p(z)` with difference denominators.
#[derive(Clone, Debug)]
pub struct ConnectionData {
    pub kind: ConnectionKind,
    pub ring: Zmod,
    /// Number of base variables `z_1..z_n`.
    pub n: usize,
    pub mats: Vec<Mat<DiagRational<Zmod>>>,
}

fn prime_ring(p: u64) -> Result<Zmod> {
    let ring = Zmod::new(p, 1)?;
    if p > MAX_PRIME {
        return Err(Error::InvalidModulus(format!("p = {p} exceeds {MAX_PRIME}")));
    }
    Ok(ring)
}

impl ConnectionData {
    /// `2 d_i - H_i`, i.e. `B_i = -H_i / 2` on `n`-vectors.
    pub fn kz(p: u64, g: usize) -> Result<Self> {
        let ring = prime_ring(p)?;
        let n = 2 * g + 1;
        let c = ring.neg(&ring.inv(&2).expect("p odd"));
        let mats = (0..n)
            .map(|i| {
                let h = GaudinOperator::new(n, i)?.matrix(&ring);
                Ok(h.iter().map(|r| r.iter().map(|e| e.scale(&c)).collect()).collect())
            })
            .collect::<Result<_>>()?;
        Ok(ConnectionData {
            kind: ConnectionKind::Kz,
            ring,
            n,
            mats,
        })
    }

    /// Gauss-Manin on coordinates in `[w_1..w_{n-1}]`: `B_i` is the transpose
    /// of the connection matrix.
    pub fn gauss_manin(p: u64, g: usize) -> Result<Self> {
        let ring = prime_ring(p)?;
        let n = 2 * g + 1;
        let mats = (0..n)
            .map(|i| Ok(transpose(&connection_matrix(&ring, n, i)?)))
            .collect::<Result<_>>()?;
        Ok(ConnectionData {
            kind: ConnectionKind::GaussManin,
            ring,
            n,
            mats,
        })
    }

    /// Rank one connection `d + sum_i b_i dz_i`.
    pub fn scalar(ring: Zmod, n: usize, b: Vec<DiagRational<Zmod>>) -> Result<Self> {
        if b.len() != n {
            return Err(Error::Shape(format!("{} components for {n} variables", b.len())));
        }
        Ok(ConnectionData {
            kind: ConnectionKind::Scalar,
            ring,
            n,
            mats: b.into_iter().map(|e| vec![vec![e]]).collect(),
        })
    }

    pub fn rank(&self) -> usize {
        self.mats[0].len()
    }

    /// `d_i B_j - d_j B_i + [B_i, B_j] = 0` for all pairs.
    pub fn check_integrable(&self) -> Result<()> {
        let pairs: Vec<(usize, usize)> = (0..self.n).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
        let bad = pairs.par_iter().find_any(|&&(i, j)| {
            let bi = &self.mats[i];
            let bj = &self.mats[j];
            let lhs = mat_sub(&mat_d(bj, i), &mat_d(bi, j));
            let comm = mat_sub(&mat_mul_dr(bi, bj), &mat_mul_dr(bj, bi));
            !mat_add_dr(&lhs, &comm).iter().flatten().all(|e| e.reduce().is_zero())
        });
        match bad {
            Some((i, j)) => Err(Error::NotIntegrable(format!("curvature in directions {} and {}", j + 1, i + 1))),
            None => Ok(()),
        }
    }
}

fn mat_d(m: &Mat<DiagRational<Zmod>>, i: usize) -> Mat<DiagRational<Zmod>> {
    m.iter().map(|r| r.iter().map(|e| e.d_dz(i).reduce()).collect()).collect()
}

fn mat_sub(a: &Mat<DiagRational<Zmod>>, b: &Mat<DiagRational<Zmod>>) -> Mat<DiagRational<Zmod>> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| u.sub(v)).collect())
        .collect()
}

fn mat_add_dr(a: &Mat<DiagRational<Zmod>>, b: &Mat<DiagRational<Zmod>>) -> Mat<DiagRational<Zmod>> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| u.add(v)).collect())
        .collect()
}

fn mat_mul_dr(a: &Mat<DiagRational<Zmod>>, b: &Mat<DiagRational<Zmod>>) -> Mat<DiagRational<Zmod>> {
    let rows = a.len();
    let cols = b[0].len();
    let inner = b.len();
    let n = a[0][0].n();
    let ring = *a[0][0].ring();
    (0..rows)
        .map(|r| {
            (0..cols)
                .map(|c| {
                    let mut acc = DiagRational::zero(ring, n);
                    for k in 0..inner {
                        if !a[r][k].is_zero() && !b[k][c].is_zero() {
                            acc = acc.add(&a[r][k].mul(&b[k][c]));
                        }
                    }
                    acc.reduce()
                })
                .collect()
        })
        .collect()
}

/// `psi_i` as a matrix of rational functions mod `p`.
pub fn p_curvature(conn: &ConnectionData, i: usize) -> Result<Mat<DiagRational<Zmod>>> {
    if i >= conn.n {
        return Err(Error::InvalidIndex(format!("direction {} of {}", i + 1, conn.n)));
    }
    let p = conn.ring.modulus().p();
    let b = &conn.mats[i];
    let mut cur = b.clone();
    for _ in 1..p {
        cur = mat_add_dr(&mat_d(&cur, i), &mat_mul_dr(b, &cur))
            .into_iter()
            .map(|r| r.into_iter().map(|e| e.reduce()).collect())
            .collect();
    }
    Ok(cur)
}

/// `(d_i + B_i)` applied `p` times to a vector of rational functions.
pub fn operator_power(conn: &ConnectionData, i: usize, v: &[DiagRational<Zmod>]) -> Vec<DiagRational<Zmod>> {
    let p = conn.ring.modulus().p();
    let b = &conn.mats[i];
    let mut cur = v.to_vec();
    for _ in 0..p {
        cur = (0..cur.len())
            .map(|r| {
                let mut acc = cur[r].d_dz(i);
                for (k, e) in cur.iter().enumerate() {
                    acc = acc.add(&b[r][k].mul(e));
                }
                acc.reduce()
            })
            .collect();
    }
    cur
}

pub fn mat_apply(m: &Mat<DiagRational<Zmod>>, v: &[DiagRational<Zmod>]) -> Vec<DiagRational<Zmod>> {
    m.iter()
        .map(|row| {
            let mut acc = DiagRational::zero(*v[0].ring(), v[0].n());
            for (a, b) in row.iter().zip(v) {
                acc = acc.add(&a.mul(b));
            }
            acc.reduce()
        })
        .collect()
}

/// Random polynomial vector of degree <= `deg`, as rational functions.
pub fn random_poly_vector(ring: Zmod, n: usize, len: usize, deg: u16, seed: u64) -> Vec<DiagRational<Zmod>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = ring.modulus().value();
    (0..len)
        .map(|_| {
            let terms: Vec<(Monomial, u64)> = (0..4)
                .map(|_| {
                    let e: Vec<u16> = (0..n).map(|_| rng.gen_range(0..=deg)).collect();
                    (Monomial::from_slice(&e), rng.gen_range(0..p))
                })
                .collect();
            DiagRational::from_poly(SparsePoly::from_terms(ring, VarSet::z(n), terms))
        })
        .collect()
}

/// Univariate truncated series `sum_{k < len} c_k t^k` mod `p^s`, used to
/// evaluate along the line `z = a + t e_i`.
#[derive(Clone, Debug, PartialEq)]
struct LineSeries {
    m: Modulus,
    len: usize,
}

impl LineSeries {
    fn constant(&self, c: u64) -> Vec<u64> {
        let mut v = vec![0; self.len];
        v[0] = self.m.reduce_u64(c);
        v
    }

    fn derivative(&self, a: &[u64]) -> Vec<u64> {
        let mut v = vec![0; self.len];
        for k in 1..self.len {
            v[k - 1] = self.m.mul(a[k], self.m.reduce_u64(k as u64));
        }
        v
    }
}

impl Ring for LineSeries {
    type Elem = Vec<u64>;
    fn zero(&self) -> Vec<u64> {
        vec![0; self.len]
    }
    fn one(&self) -> Vec<u64> {
        self.constant(1)
    }
    fn from_i64(&self, v: i64) -> Vec<u64> {
        let mut out = self.zero();
        out[0] = self.m.reduce_i64(v);
        out
    }
    fn from_bigint(&self, v: &num_bigint::BigInt) -> Vec<u64> {
        let mut out = self.zero();
        out[0] = Zmod(self.m).reduce_bigint(v);
        out
    }
    fn add(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        a.iter().zip(b).map(|(&x, &y)| self.m.add(x, y)).collect()
    }
    fn sub(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        a.iter().zip(b).map(|(&x, &y)| self.m.sub(x, y)).collect()
    }
    fn neg(&self, a: &Vec<u64>) -> Vec<u64> {
        a.iter().map(|&x| self.m.neg(x)).collect()
    }
    fn mul(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        let mut out = self.zero();
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate().take(self.len - i) {
                out[i + j] = self.m.add(out[i + j], self.m.mul(x, y));
            }
        }
        out
    }
    fn is_zero(&self, a: &Vec<u64>) -> bool {
        a.iter().all(|&x| x == 0)
    }
    fn inv(&self, a: &Vec<u64>) -> Option<Vec<u64>> {
        let a0 = self.m.inv(a[0])?;
        let mut out = self.zero();
        out[0] = a0;
        for k in 1..self.len {
            let mut acc = 0;
            for j in 1..=k {
                acc = self.m.add(acc, self.m.mul(a[j], out[k - j]));
            }
            out[k] = self.m.neg(self.m.mul(acc, a0));
        }
        Some(out)
    }
    fn render(&self, a: &Vec<u64>) -> String {
        format!("{a:?}")
    }
    fn label(&self) -> String {
        format!("{}[[t]]/t^{}", self.m.label(), self.len)
    }
}

fn along_line(e: &DiagRational<Zmod>, ls: &LineSeries, point: &[u64], i: usize) -> Result<Vec<u64>> {
    let pt: Vec<Vec<u64>> = point
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            let mut v = ls.constant(a);
            if k == i && ls.len > 1 {
                v[1] = 1;
            }
            v
        })
        .collect();
    e.map_ring(ls.clone(), |&c| ls.constant(c)).eval(&pt)
}

/// `psi_i(point)` from the same recursion run on series along `z = a + t e_i`.
pub fn p_curvature_at(conn: &ConnectionData, i: usize, point: &[u64]) -> Result<Mat<u64>> {
    let p = conn.ring.modulus().p();
    let ls = LineSeries {
        m: conn.ring.modulus(),
        len: p as usize,
    };
    let b: Mat<Vec<u64>> = conn.mats[i]
        .iter()
        .map(|r| r.iter().map(|e| along_line(e, &ls, point, i)).collect())
        .collect::<Result<_>>()?;
    let r = b.len();
    let mut cur = b.clone();
    for _ in 1..p {
        cur = (0..r)
            .map(|x| {
                (0..r)
                    .map(|y| {
                        let mut acc = ls.derivative(&cur[x][y]);
                        for k in 0..r {
                            acc = ls.add(&acc, &ls.mul(&b[x][k], &cur[k][y]));
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
    }
    Ok(cur.iter().map(|row| row.iter().map(|e| e[0]).collect()).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnihilationReport {
    pub p: u64,
    pub g: usize,
    /// `(i, l)` pairs with `psi_i Q^{1,l} != 0`.
    pub failures: Vec<(usize, usize)>,
    pub pass: bool,
}

/// `psi_i^{KZ} Q^{1,l} = 0 mod p` as rational functions, for all `i, l`.
pub fn annihilation_check(p: u64, g: usize) -> Result<AnnihilationReport> {
    let n = 2 * g + 1;
    if p <= n as u64 {
        return Err(Error::DegenerateRegime(format!("requires p > n = {n}")));
    }
    let conn = ConnectionData::kz(p, g)?;
    let qs = q_solutions(p, 1, g)?;
    let vecs: Vec<Vec<DiagRational<Zmod>>> = qs
        .vectors
        .iter()
        .map(|v| v.entries().iter().cloned().map(DiagRational::from_poly).collect())
        .collect();
    let failures: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<Vec<(usize, usize)>> {
            let psi = p_curvature(&conn, i)?;
            Ok(vecs
                .iter()
                .enumerate()
                .filter(|(_, v)| !mat_apply(&psi, v).iter().all(|e| e.is_zero()))
                .map(|(l, _)| (i, l))
                .collect())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(AnnihilationReport {
        p,
        g,
        pass: failures.is_empty(),
        failures,
    })
}

/// Rank over `F_p` of the span of the images of all `psi_i^{GM}(point)`.
pub fn image_span_rank(p: u64, g: usize, point: &[u64]) -> Result<usize> {
    crate::crystalmap::check_point(p, g, point)?;
    let conn = ConnectionData::gauss_manin(p, g)?;
    let psis = (0..conn.n)
        .map(|i| p_curvature_at(&conn, i, point))
        .collect::<Result<Vec<_>>>()?;
    let rows: Mat<u64> = psis.iter().flat_map(transpose).collect();
    Ok(rank_mod_p(&conn.ring.modulus(), &rows))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KodairaSpencerReport {
    pub point: Vec<u64>,
    pub image_rank: usize,
    pub holomorphic_rank: usize,
    pub pass: bool,
}

/// The images `psi_i^{GM} [dx/y]` span the same space as all images.
pub fn kodaira_spencer_check(p: u64, g: usize, point: &[u64]) -> Result<KodairaSpencerReport> {
    crate::crystalmap::check_point(p, g, point)?;
    let conn = ConnectionData::gauss_manin(p, g)?;
    let ring = conn.ring;
    let pt: Vec<u64> = point.iter().map(|&a| a % p).collect();
    let curve = CurveData::new(ring, pt.clone())?;
    let c = curve.reduce(&FormRep::new(UniPoly::constant(ring, 1), 0))?.coeffs;
    let psis = (0..conn.n)
        .map(|i| p_curvature_at(&conn, i, &pt))
        .collect::<Result<Vec<_>>>()?;
    let m = ring.modulus();
    let all: Mat<u64> = psis.iter().flat_map(transpose).collect();
    let images: Mat<u64> = psis
        .iter()
        .map(|x| {
            x.iter()
                .map(|row| row.iter().zip(&c).fold(0, |acc, (&a, &b)| m.add(acc, m.mul(a, b))))
                .collect()
        })
        .collect();
    let image_rank = rank_mod_p(&m, &all);
    let mut joined = all.clone();
    joined.extend(images.iter().cloned());
    let holomorphic_rank = rank_mod_p(&m, &images);
    let pass = holomorphic_rank == image_rank && rank_mod_p(&m, &joined) == image_rank;
    Ok(KodairaSpencerReport {
        point: point.to_vec(),
        image_rank,
        holomorphic_rank,
        pass,
    })
}

/// `d + lambda dz_1` in one variable: `psi_1 = lambda^p`.
pub fn constant_scalar(p: u64, lambda: u64) -> Result<Mat<DiagRational<Zmod>>> {
    let ring = prime_ring(p)?;
    let conn = ConnectionData::scalar(ring, 1, vec![DiagRational::constant(ring, 1, lambda % p)])?;
    p_curvature(&conn, 0)
}

/// `d + dlog(z_1 - z_2)`: the recursion gives `(1 + (p-1)!) / (z_1 - z_2)^p`, zero mod `p`.
pub fn wilson_example(p: u64) -> Result<Mat<DiagRational<Zmod>>> {
    let ring = prime_ring(p)?;
    let b1 = DiagRational::inv_diff(ring, 2, 0, 1);
    let b2 = DiagRational::inv_diff(ring, 2, 1, 0);
    let conn = ConnectionData::scalar(ring, 2, vec![b1, b2])?;
    conn.check_integrable()?;
    p_curvature(&conn, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_examples() {
        let m = constant_scalar(7, 3).unwrap();
        assert_eq!(m[0][0].eval(&[0]).unwrap(), Zmod::new(7, 1).unwrap().pow(&3, 7));
        assert!(wilson_example(5).unwrap()[0][0].is_zero());
        assert!(wilson_example(7).unwrap()[0][0].is_zero());
        let zero = ConnectionData::scalar(Zmod::new(5, 1).unwrap(), 1, vec![DiagRational::zero(Zmod::new(5, 1).unwrap(), 1)]).unwrap();
        assert!(p_curvature(&zero, 0).unwrap()[0][0].is_zero());
    }

    #[test]
    fn connections_are_integrable() {
        ConnectionData::kz(5, 1).unwrap().check_integrable().unwrap();
        ConnectionData::gauss_manin(5, 1).unwrap().check_integrable().unwrap();
        ConnectionData::gauss_manin(7, 2).unwrap().check_integrable().unwrap();
    }

    #[test]
    fn recursion_matches_operator_power() {
        let conn = ConnectionData::gauss_manin(5, 1).unwrap();
        let v = random_poly_vector(conn.ring, 3, 2, 2, 9);
        for i in 0..3 {
            let psi = p_curvature(&conn, i).unwrap();
            let a = mat_apply(&psi, &v);
            let b = operator_power(&conn, i, &v);
            for (x, y) in a.iter().zip(&b) {
                assert!(x.sub(y).reduce().is_zero());
            }
        }
    }

    #[test]
    fn pointwise_recursion_matches_symbolic() {
        let conn = ConnectionData::kz(5, 1).unwrap();
        let pt = [0u64, 1, 2];
        for i in 0..3 {
            let sym = p_curvature(&conn, i).unwrap();
            let at = p_curvature_at(&conn, i, &pt).unwrap();
            for (r, row) in sym.iter().enumerate() {
                for (c, e) in row.iter().enumerate() {
                    assert_eq!(e.eval(&pt).unwrap(), at[r][c]);
                }
            }
        }
    }

    #[test]
    fn small_annihilation_and_rank() {
        assert!(annihilation_check(5, 1).unwrap().pass);
        assert_eq!(image_span_rank(5, 1, &[0, 1, 2]).unwrap(), 1);
    }
}
