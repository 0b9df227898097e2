//! Linear algebra over general rings and over `Z/p^s`.
//!
//! `Z/p^s` is local, so every finitely generated submodule of `(Z/p^s)^m`
//! has a Howell basis whose pivots are powers of `p`.

use super::modulus::Modulus;
use super::ring::Ring;
use crate::error::{Error, Result};

pub type Mat<E> = Vec<Vec<E>>;

pub fn identity<R: Ring>(ring: &R, n: usize) -> Mat<R::Elem> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { ring.one() } else { ring.zero() }).collect())
        .collect()
}

pub fn transpose<E: Clone>(m: &Mat<E>) -> Mat<E> {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len())
        .map(|j| m.iter().map(|row| row[j].clone()).collect())
        .collect()
}

pub fn mat_mul<R: Ring>(ring: &R, a: &Mat<R::Elem>, b: &Mat<R::Elem>) -> Mat<R::Elem> {
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    a.iter()
        .map(|row| {
            assert_eq!(row.len(), k);
            (0..m)
                .map(|j| {
                    let mut acc = ring.zero();
                    for (l, x) in row.iter().enumerate() {
                        if !ring.is_zero(x) {
                            ring.add_assign(&mut acc, &ring.mul(x, &b[l][j]));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec<R: Ring>(ring: &R, a: &Mat<R::Elem>, v: &[R::Elem]) -> Vec<R::Elem> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(ring.zero(), |acc, (x, y)| ring.add(&acc, &ring.mul(x, y)))
        })
        .collect()
}

pub fn mat_add<R: Ring>(ring: &R, a: &Mat<R::Elem>, b: &Mat<R::Elem>) -> Mat<R::Elem> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| ring.add(u, v)).collect())
        .collect()
}

pub fn mat_scale<R: Ring>(ring: &R, a: &Mat<R::Elem>, c: &R::Elem) -> Mat<R::Elem> {
    a.iter()
        .map(|x| x.iter().map(|u| ring.mul(u, c)).collect())
        .collect()
}

pub fn minor<E: Clone>(m: &Mat<E>, row: usize, col: usize) -> Mat<E> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| {
            r.iter()
                .enumerate()
                .filter(|(j, _)| *j != col)
                .map(|(_, x)| x.clone())
                .collect()
        })
        .collect()
}

/// Determinant by cofactor expansion; meant for small matrices over any ring.
pub fn det_laplace<R: Ring>(ring: &R, m: &Mat<R::Elem>) -> R::Elem {
    let n = m.len();
    match n {
        0 => ring.one(),
        1 => m[0][0].clone(),
        2 => ring.sub(&ring.mul(&m[0][0], &m[1][1]), &ring.mul(&m[0][1], &m[1][0])),
        _ => {
            let mut acc = ring.zero();
            for j in 0..n {
                if ring.is_zero(&m[0][j]) {
                    continue;
                }
                let t = ring.mul(&m[0][j], &det_laplace(ring, &minor(m, 0, j)));
                acc = if j % 2 == 0 { ring.add(&acc, &t) } else { ring.sub(&acc, &t) };
            }
            acc
        }
    }
}

/// Adjugate, so that `m * adj(m) = det(m) * I`.
pub fn adjugate<R: Ring>(ring: &R, m: &Mat<R::Elem>) -> Mat<R::Elem> {
    let n = m.len();
    if n == 1 {
        return vec![vec![ring.one()]];
    }
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = det_laplace(ring, &minor(m, j, i));
                    if (i + j) % 2 == 0 {
                        c
                    } else {
                        ring.neg(&c)
                    }
                })
                .collect()
        })
        .collect()
}

/// Solves `A X = B` for square `A`, pivoting only on units.
pub fn solve_unit_pivot<R: Ring>(ring: &R, a: &Mat<R::Elem>, b: &Mat<R::Elem>) -> Result<Mat<R::Elem>> {
    let n = a.len();
    let mut aug: Mat<R::Elem> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x.iter().chain(y.iter()).cloned().collect())
        .collect();
    let w = aug.first().map_or(0, |r| r.len());
    for c in 0..n {
        let (piv, inv) = (c..n)
            .find_map(|r| ring.inv(&aug[r][c]).map(|i| (r, i)))
            .ok_or_else(|| Error::NotAUnit(format!("no unit pivot in column {c}")))?;
        aug.swap(c, piv);
        for x in aug[c].iter_mut() {
            *x = ring.mul(x, &inv);
        }
        let pivot_row = aug[c].clone();
        for (r, row) in aug.iter_mut().enumerate() {
            if r == c || ring.is_zero(&row[c]) {
                continue;
            }
            let f = row[c].clone();
            for k in c..w {
                row[k] = ring.sub(&row[k], &ring.mul(&f, &pivot_row[k]));
            }
        }
    }
    Ok(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn inverse<R: Ring>(ring: &R, a: &Mat<R::Elem>) -> Result<Mat<R::Elem>> {
    solve_unit_pivot(ring, a, &identity(ring, a.len()))
}

/// Rank of the reduction modulo `p`.
pub fn rank_mod_p(m: &Modulus, a: &Mat<u64>) -> usize {
    let p = m.p();
    let fp = Modulus::new(p, 1).expect("p is prime");
    let mut rows: Mat<u64> = a.iter().map(|r| r.iter().map(|x| x % p).collect()).collect();
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..ncols {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][c] != 0) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = fp.inv(rows[rank][c]).unwrap();
        let prow: Vec<u64> = rows[rank].iter().map(|&x| fp.mul(x, inv)).collect();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[c] != 0 {
                let f = row[c];
                for k in c..ncols {
                    row[k] = fp.sub(row[k], fp.mul(f, prow[k]));
                }
            }
        }
        rows[rank] = prow;
        rank += 1;
    }
    rank
}

/// Determinant over `Z/p^s` by elimination on pivots of least valuation.
pub fn det_mod(m: &Modulus, a: &Mat<u64>) -> u64 {
    let n = a.len();
    let mut rows = a.clone();
    let mut det = 1u64;
    for c in 0..n {
        let piv = (c..n)
            .filter(|&r| rows[r][c] != 0)
            .min_by_key(|&r| m.valuation(rows[r][c]));
        let Some(piv) = piv else {
            return 0;
        };
        if piv != c {
            rows.swap(c, piv);
            det = m.neg(det);
        }
        let pv = rows[c][c];
        let v = m.valuation(pv);
        let unit_inv = m.inv(m.div_p_power(pv, v)).unwrap();
        det = m.mul(det, pv);
        for r in c + 1..n {
            if rows[r][c] == 0 {
                continue;
            }
            // rows[r][c] = p^v * q exactly
            let q = m.mul(m.div_p_power(rows[r][c], v), unit_inv);
            for k in c..n {
                rows[r][k] = m.sub(rows[r][k], m.mul(q, rows[c][k]));
            }
        }
    }
    det
}

/// Howell basis of the row span: pivots `p^v` in strictly increasing columns,
/// entries above a pivot reduced below it, and closed under the annihilator step.
pub fn howell_form(m: &Modulus, rows: &Mat<u64>, ncols: usize) -> Mat<u64> {
    let mut pool: Mat<u64> = rows
        .iter()
        .map(|r| r.iter().map(|&x| m.reduce_u64(x)).collect())
        .filter(|r: &Vec<u64>| r.iter().any(|&x| x != 0))
        .collect();
    let mut basis: Mat<u64> = Vec::new();
    for c in 0..ncols {
        let piv = pool
            .iter()
            .enumerate()
            .filter(|(_, r)| r[c] != 0)
            .min_by_key(|(_, r)| m.valuation(r[c]))
            .map(|(i, _)| i);
        let Some(piv) = piv else {
            continue;
        };
        let mut prow = pool.swap_remove(piv);
        let v = m.valuation(prow[c]);
        let u = m.inv(m.div_p_power(prow[c], v)).unwrap();
        for x in prow.iter_mut() {
            *x = m.mul(*x, u);
        }
        for r in pool.iter_mut() {
            if r[c] != 0 {
                let q = m.div_p_power(r[c], v);
                for k in c..ncols {
                    r[k] = m.sub(r[k], m.mul(q, prow[k]));
                }
            }
        }
        if v > 0 {
            let f = m.p().pow(m.s() - v);
            let extra: Vec<u64> = prow.iter().map(|&x| m.mul(x, f)).collect();
            if extra.iter().any(|&x| x != 0) {
                pool.push(extra);
            }
        }
        pool.retain(|r| r.iter().any(|&x| x != 0));
        basis.push(prow);
    }
    // reduce above pivots
    let pivots: Vec<usize> = basis
        .iter()
        .map(|r| r.iter().position(|&x| x != 0).unwrap())
        .collect();
    for i in 0..basis.len() {
        let c = pivots[i];
        let pv = basis[i][c];
        for j in 0..i {
            let q = basis[j][c] / pv;
            if q != 0 {
                for k in c..ncols {
                    basis[j][k] = m.sub(basis[j][k], m.mul(q, basis[i][k]));
                }
            }
        }
    }
    basis
}

/// Rows whose pivot is a unit; their number is the McCoy rank of the span.
pub fn unit_pivot_rows(m: &Modulus, howell: &Mat<u64>) -> Vec<usize> {
    howell
        .iter()
        .enumerate()
        .filter(|(_, r)| r.iter().find(|&&x| x != 0).is_some_and(|&x| m.is_unit(x)))
        .map(|(i, _)| i)
        .collect()
}

/// Membership in the span of a Howell basis.
pub fn in_span(m: &Modulus, howell: &Mat<u64>, v: &[u64]) -> bool {
    let mut v: Vec<u64> = v.iter().map(|&x| m.reduce_u64(x)).collect();
    for row in howell {
        let c = row.iter().position(|&x| x != 0).unwrap();
        let pv = row[c];
        if v[c] % pv != 0 {
            return false;
        }
        let q = v[c] / pv;
        for k in c..v.len() {
            v[k] = m.sub(v[k], m.mul(q, row[k]));
        }
    }
    v.iter().all(|&x| x == 0)
}

/// Coordinates `x` with `sum x_i rows_i = v`, if `v` lies in the span of `rows`.
pub fn solve_in_span(m: &Modulus, rows: &Mat<u64>, v: &[u64]) -> Option<Vec<u64>> {
    // Track combinations: augment with the identity and compute Howell form.
    let k = rows.len();
    let ncols = v.len();
    let aug: Mat<u64> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut x = r.clone();
            x.extend((0..k).map(|j| u64::from(i == j)));
            x
        })
        .collect();
    let h = howell_form(m, &aug, ncols + k);
    let mut target: Vec<u64> = v.iter().map(|&x| m.reduce_u64(x)).collect();
    target.extend(std::iter::repeat_n(0, k));
    for row in &h {
        let c = row.iter().position(|&x| x != 0).unwrap();
        if c >= ncols {
            break;
        }
        let pv = row[c];
        if target[c] % pv != 0 {
            return None;
        }
        let q = target[c] / pv;
        for j in c..ncols + k {
            target[j] = m.sub(target[j], m.mul(q, row[j]));
        }
    }
    if target[..ncols].iter().any(|&x| x != 0) {
        return None;
    }
    // target now holds -x in the trailing block
    Some(target[ncols..].iter().map(|&x| m.neg(x)).collect())
}

/// Smith form `U A V = diag(p^{d_i})`; returns the exponents and `V`, `V^{-1}`.
pub struct Smith {
    pub exponents: Vec<u32>,
    pub v: Mat<u64>,
    pub v_inv: Mat<u64>,
}

pub fn smith(m: &Modulus, a: &Mat<u64>, ncols: usize) -> Smith {
    let mut rows: Mat<u64> = a
        .iter()
        .map(|r| r.iter().map(|&x| m.reduce_u64(x)).collect())
        .collect();
    let nrows = rows.len();
    let mut v = identity(&super::ring::Zmod(*m), ncols);
    let mut v_inv = v.clone();
    let mut exps = Vec::new();
    for t in 0..nrows.min(ncols) {
        // pivot of least valuation in the remaining block
        let mut best: Option<(usize, usize, u32)> = None;
        for (i, row) in rows.iter().enumerate().skip(t) {
            for (j, &x) in row.iter().enumerate().skip(t) {
                if x != 0 {
                    let val = m.valuation(x);
                    if best.is_none_or(|b| val < b.2) {
                        best = Some((i, j, val));
                    }
                }
            }
        }
        let Some((bi, bj, val)) = best else {
            break;
        };
        rows.swap(t, bi);
        if bj != t {
            for r in rows.iter_mut() {
                r.swap(t, bj);
            }
            for r in v.iter_mut() {
                r.swap(t, bj);
            }
            v_inv.swap(t, bj);
        }
        let u = m.inv(m.div_p_power(rows[t][t], val)).unwrap();
        for x in rows[t].iter_mut() {
            *x = m.mul(*x, u);
        }
        let prow = rows[t].clone();
        for r in rows.iter_mut().skip(t + 1) {
            if r[t] != 0 {
                let q = m.div_p_power(r[t], val);
                for k in t..ncols {
                    r[k] = m.sub(r[k], m.mul(q, prow[k]));
                }
            }
        }
        // clear the pivot row with column operations: col_k -= q col_t
        for k in t + 1..ncols {
            if prow[k] == 0 {
                continue;
            }
            let q = m.div_p_power(prow[k], val);
            for r in rows.iter_mut() {
                r[k] = m.sub(r[k], m.mul(q, r[t]));
            }
            for r in v.iter_mut() {
                r[k] = m.sub(r[k], m.mul(q, r[t]));
            }
            // V^{-1} row_t += q row_k
            let rk = v_inv[k].clone();
            for (x, y) in v_inv[t].iter_mut().zip(rk) {
                *x = m.add(*x, m.mul(q, y));
            }
        }
        exps.push(val);
    }
    Smith {
        exponents: exps,
        v,
        v_inv,
    }
}

/// Generators of `{x : A x = 0}` in `(Z/p^s)^ncols`.
pub fn kernel(m: &Modulus, a: &Mat<u64>, ncols: usize) -> Mat<u64> {
    let sm = smith(m, a, ncols);
    let r = sm.exponents.len();
    let mut gens = Vec::new();
    for i in 0..ncols {
        let scale = if i < r {
            let d = sm.exponents[i];
            if d == 0 {
                continue;
            }
            m.p().pow(m.s() - d)
        } else {
            1
        };
        // column i of V scaled
        gens.push((0..ncols).map(|k| m.mul(sm.v[k][i], scale)).collect());
    }
    gens
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactring::ring::{Rationals, Zmod};

    fn m25() -> Modulus {
        Modulus::new(5, 2).unwrap()
    }

    #[test]
    fn howell_closure() {
        let m = m25();
        // span of (5, 1): contains 5*(5,1) = (0, 5)
        let h = howell_form(&m, &vec![vec![5, 1]], 2);
        assert_eq!(h, vec![vec![5, 1], vec![0, 5]]);
        assert!(in_span(&m, &h, &[0, 5]));
        assert!(!in_span(&m, &h, &[0, 1]));
        assert_eq!(unit_pivot_rows(&m, &h).len(), 0);
    }

    #[test]
    fn kernel_annihilates() {
        let m = m25();
        let a = vec![vec![5, 10, 3], vec![0, 5, 15]];
        let ker = kernel(&m, &a, 3);
        for g in &ker {
            for row in &a {
                let s = row.iter().zip(g).fold(0, |acc, (x, y)| m.add(acc, m.mul(*x, *y)));
                assert_eq!(s, 0);
            }
        }
        // kernel has 25 * 5 ... elements: check a known vector is inside
        let hk = howell_form(&m, &ker, 3);
        assert!(in_span(&m, &hk, &[5, 0, 0]));
    }

    #[test]
    fn determinants_agree() {
        let m = m25();
        let a = vec![vec![5, 1, 7], vec![2, 10, 3], vec![4, 4, 20]];
        let z = Zmod(m);
        assert_eq!(det_mod(&m, &a), det_laplace(&z, &a));
        let adj = adjugate(&z, &a);
        let prod = mat_mul(&z, &a, &adj);
        let d = det_laplace(&z, &a);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(prod[i][j], if i == j { d } else { 0 });
            }
        }
    }

    #[test]
    fn solve_over_q() {
        let q = |v: i64| Rationals.from_i64(v);
        let a = vec![vec![q(2), q(1)], vec![q(1), q(3)]];
        let b = vec![vec![q(1)], vec![q(2)]];
        let x = solve_unit_pivot(&Rationals, &a, &b).unwrap();
        assert_eq!(mat_mul(&Rationals, &a, &x), b);
    }

    #[test]
    fn span_coordinates() {
        let m = m25();
        let rows = vec![vec![1, 2, 0], vec![0, 5, 1]];
        let x = solve_in_span(&m, &rows, &[3, 11, 1]).unwrap();
        let combo: Vec<u64> = (0..3)
            .map(|k| m.add(m.mul(x[0], rows[0][k]), m.mul(x[1], rows[1][k])))
            .collect();
        assert_eq!(combo, vec![3, 11, 1]);
        assert!(solve_in_span(&m, &rows, &[0, 1, 0]).is_none());
    }

    use crate::exactring::ring::Ring;
}
