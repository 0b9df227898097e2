//! The Gauss-Manin connection on the classes `[w_j]`.

use super::curve::{CurveData, FormRep};
use crate::error::{Error, Result};
use crate::exactring::linalg::Mat;
use crate::exactring::{DiagRational, Ring, UniPoly};

/// Sign relating the connection formula below to direct differentiation of
/// the forms: `d/dz_i [w_j] = SIGMA * (gm_matrix row j)`. Measured by
/// [`measure_sign`] and asserted in the tests.
pub const SIGMA: i64 = -1;

/// Full `n x n` matrix `F` with `nabla_i [w_j] = sum_k F_{jk} [w_k]` where
/// `nabla_i [w_j] = -1/2 ([w_i] - [w_j]) / (z_i - z_j)` for `j != i` and
/// `nabla_i [w_i] = 1/2 sum_{j != i} ([w_i] - [w_j]) / (z_i - z_j)`.
pub fn gm_full<R: Ring>(ring: &R, n: usize, i: usize) -> Result<Mat<DiagRational<R>>> {
    let half = ring
        .inv(&ring.from_i64(2))
        .ok_or_else(|| Error::DivisionByP("inverting 2".into()))?;
    let c = ring.neg(&half);
    let zero = DiagRational::zero(ring.clone(), n);
    let mut m = vec![vec![zero; n]; n];
    for j in (0..n).filter(|&j| j != i) {
        let t = DiagRational::inv_diff(ring.clone(), n, i, j).scale(&c);
        m[j][i] = m[j][i].add(&t);
        m[j][j] = m[j][j].sub(&t);
        // row i carries the opposite coefficient
        m[i][i] = m[i][i].sub(&t);
        m[i][j] = m[i][j].add(&t);
    }
    Ok(m)
}

/// `(n-1) x (n-1)` matrix in the basis `[w_1..w_{n-1}]`, after `[w_n] = -sum_{j<n} [w_j]`.
pub fn gm_matrix<R: Ring>(ring: &R, n: usize, i: usize) -> Result<Mat<DiagRational<R>>> {
    let full = gm_full(ring, n, i)?;
    Ok(eliminate_last(&full))
}

/// Matrix of the connection itself: `SIGMA * gm_matrix`.
pub fn connection_matrix<R: Ring>(ring: &R, n: usize, i: usize) -> Result<Mat<DiagRational<R>>> {
    let s = ring.from_i64(SIGMA);
    Ok(gm_matrix(ring, n, i)?
        .into_iter()
        .map(|row| row.into_iter().map(|e| e.scale(&s)).collect())
        .collect())
}

pub(crate) fn eliminate_last<R: Ring>(full: &Mat<DiagRational<R>>) -> Mat<DiagRational<R>> {
    let n = full.len();
    (0..n - 1)
        .map(|j| {
            (0..n - 1)
                .map(|k| full[j][k].sub(&full[j][n - 1]).reduce())
                .collect()
        })
        .collect()
}

/// Oracle at a point: differentiate the representative of `w_j` in `z_i`
/// and reduce. Row `j` holds the class of `d/dz_i w_j`.
pub fn oracle_matrix<R: Ring>(curve: &CurveData<R>, i: usize) -> Result<Mat<R::Elem>> {
    let r = curve.ring();
    let n = curve.n();
    let half = r.inv(&r.from_i64(2)).ok_or_else(|| Error::DivisionByP("inverting 2".into()))?;
    let mut out = Vec::with_capacity(n - 1);
    for j in 0..n - 1 {
        let form = if j == i {
            // d/dz_i (f/(x-z_i)) dx/y^3 = 3/2 (f/(x-z_i))^2 dx/y^5
            let c = curve.cofactor(i);
            FormRep::new(c.mul(&c).scale(&r.mul(&r.from_i64(3), &half)), 2)
        } else {
            // 1/2 f/((x-z_i)(x-z_j)) dx/y^3
            let (q, _) = curve
                .cofactor(j)
                .div_rem(&UniPoly::linear(r.clone(), &curve.point()[i]))?;
            FormRep::new(q.scale(&half), 1)
        };
        out.push(curve.reduce(&form)?.coeffs);
    }
    Ok(out)
}

/// The connection formula evaluated at the curve's point.
pub fn gm_matrix_at<R: Ring>(curve: &CurveData<R>, i: usize) -> Result<Mat<R::Elem>> {
    let m = gm_matrix(curve.ring(), curve.n(), i)?;
    m.iter()
        .map(|row| row.iter().map(|e| e.eval(curve.point())).collect())
        .collect()
}

/// `+1` or `-1` if the oracle agrees with the formula up to that sign for
/// every `i`; `None` otherwise.
pub fn measure_sign<R: Ring>(curve: &CurveData<R>) -> Result<Option<i64>> {
    let r = curve.ring();
    let pairs = (0..curve.n())
        .map(|i| Ok((oracle_matrix(curve, i)?, gm_matrix_at(curve, i)?)))
        .collect::<Result<Vec<_>>>()?;
    for candidate in [1i64, -1] {
        let c = r.from_i64(candidate);
        let ok = pairs.iter().all(|(oracle, formula)| {
            oracle
                .iter()
                .flatten()
                .zip(formula.iter().flatten())
                .all(|(a, b)| *a == r.mul(&c, b))
        });
        if ok {
            return Ok(Some(candidate));
        }
    }
    Ok(None)
}

/// Checks that with sign `sigma` the KZ system `d_i I = 1/2 H_i I`, written in
/// the coordinates `I_1..I_{n-1}`, coincides with the dual Gauss-Manin system
/// `d_i I_j = sigma <I, nabla_i [w_j]>` as identities of rational functions.
pub fn duality_holds<R: Ring>(ring: &R, n: usize, sigma: i64) -> Result<bool> {
    use crate::kzsystem::GaudinOperator;
    let half = ring.inv(&ring.from_i64(2)).ok_or_else(|| Error::DivisionByP("inverting 2".into()))?;
    let s = ring.from_i64(sigma);
    for i in 0..n {
        let h = GaudinOperator::new(n, i)?.matrix(ring);
        let gm = gm_matrix(ring, n, i)?;
        for j in 0..n - 1 {
            for k in 0..n - 1 {
                // I_n = -sum_{k<n} I_k
                let kz = h[j][k].sub(&h[j][n - 1]).scale(&half);
                let dual = gm[j][k].scale(&s);
                if !kz.sub(&dual).reduce().is_zero() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactring::Rationals;

    #[test]
    fn sign_is_measured() {
        for pt in [vec![0, 1, 2], vec![0, 1, 3, 7, -2], vec![3, -4, 9, 1, 6, 13, -7]] {
            let c = CurveData::new(Rationals, pt.iter().map(|&v| Rationals.from_i64(v)).collect()).unwrap();
            assert_eq!(measure_sign(&c).unwrap(), Some(SIGMA));
        }
    }

    #[test]
    fn symmetry_and_translation() {
        let n = 5;
        let r = Rationals;
        let fulls: Vec<_> = (0..n).map(|i| gm_full(&r, n, i).unwrap()).collect();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                // nabla_i w_j = nabla_j w_i
                for k in 0..n {
                    assert!(fulls[i][j][k].sub(&fulls[j][i][k]).reduce().is_zero());
                }
            }
        }
        for j in 0..n {
            for k in 0..n {
                let s = (0..n).fold(DiagRational::zero(r, n), |acc, i| acc.add(&fulls[i][j][k]));
                assert!(s.reduce().is_zero());
            }
        }
    }

    #[test]
    fn duality_needs_the_measured_sign() {
        for g in 1..=2 {
            let n = 2 * g + 1;
            assert!(duality_holds(&Rationals, n, SIGMA).unwrap());
            assert!(!duality_holds(&Rationals, n, -SIGMA).unwrap());
        }
    }
}
