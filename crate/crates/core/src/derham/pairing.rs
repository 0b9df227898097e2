//! The cup-product pairing `<[w_j], [w_k]> = sum_P res_P(F_j w_k)` computed
//! from Laurent expansions at the finite branch points, with local parameter
//! `u = c y`. Infinity contributes nothing: every `w_j` vanishes there.

use super::gm::{gm_matrix, SIGMA};
use crate::error::{Error, Result};
use crate::exactring::linalg::{adjugate, det_laplace, mat_add, mat_mul, transpose, Mat};
use crate::exactring::{Dual, Modulus, Rationals, Ring, Zmod};
use crate::hypersol::q_solutions;
use num_rational::BigRational;

/// Laurent series `sum_{e >= val} c_e u^e`, known for `e < val + coeffs.len()`.
#[derive(Clone, Debug)]
struct Laurent<R: Ring> {
    val: i64,
    coeffs: Vec<R::Elem>,
}

impl<R: Ring> Laurent<R> {
    fn upper(&self) -> i64 {
        self.val + self.coeffs.len() as i64
    }

    fn coeff(&self, ring: &R, e: i64) -> Result<R::Elem> {
        if e >= self.upper() {
            return Err(Error::InsufficientTruncation(format!(
                "coefficient u^{e} needs more than {} terms",
                self.coeffs.len()
            )));
        }
        if e < self.val {
            return Ok(ring.zero());
        }
        Ok(self.coeffs[(e - self.val) as usize].clone())
    }

    fn mul(&self, ring: &R, o: &Self) -> Self {
        let len = self.coeffs.len().min(o.coeffs.len());
        let mut c = vec![ring.zero(); len];
        for (a, x) in self.coeffs.iter().enumerate().take(len) {
            for (b, y) in o.coeffs.iter().enumerate().take(len - a) {
                ring.add_assign(&mut c[a + b], &ring.mul(x, y));
            }
        }
        Laurent {
            val: self.val + o.val,
            coeffs: c,
        }
    }

    /// Termwise primitive; the residue must vanish.
    fn integrate(&self, ring: &R) -> Result<Self> {
        let mut c = Vec::with_capacity(self.coeffs.len());
        for (k, x) in self.coeffs.iter().enumerate() {
            let e = self.val + k as i64;
            if e == -1 {
                if !ring.is_zero(x) {
                    return Err(Error::InsufficientTruncation("form has a residue".into()));
                }
                c.push(ring.zero());
            } else {
                let inv = ring
                    .inv(&ring.from_i64(e + 1))
                    .ok_or_else(|| Error::DivisionByP(format!("integrating u^{e}")))?;
                c.push(ring.mul(x, &inv));
            }
        }
        Ok(Laurent {
            val: self.val + 1,
            coeffs: c,
        })
    }
}

/// Power series in `T` with `len` coefficients.
fn series_mul<R: Ring>(ring: &R, a: &[R::Elem], b: &[R::Elem], len: usize) -> Vec<R::Elem> {
    let mut c = vec![ring.zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if ring.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            ring.add_assign(&mut c[i + j], &ring.mul(x, y));
        }
    }
    c
}

fn series_inv<R: Ring>(ring: &R, a: &[R::Elem], len: usize) -> Result<Vec<R::Elem>> {
    let a0 = ring
        .inv(&a[0])
        .ok_or_else(|| Error::NotAUnit("constant term of a local expansion".into()))?;
    let mut out = vec![ring.zero(); len];
    out[0] = a0.clone();
    for k in 1..len {
        let mut acc = ring.zero();
        for j in 1..=k.min(a.len() - 1) {
            ring.add_assign(&mut acc, &ring.mul(&a[j], &out[k - j]));
        }
        out[k] = ring.neg(&ring.mul(&acc, &a0));
    }
    Ok(out)
}

/// Expansions of `w_1..w_{n-1}` (as `phi(u) du`) at the branch point `z_m`.
fn local_forms<R: Ring>(
    ring: &R,
    point: &[R::Elem],
    m: usize,
    scale: &R::Elem,
    terms: usize,
) -> Result<Vec<Laurent<R>>> {
    let n = point.len();
    let len = terms;
    // h(w) = prod_{k != m} (w + z_m - z_k) as a polynomial in w
    let mut h = vec![ring.one()];
    for k in (0..n).filter(|&k| k != m) {
        let c = ring.sub(&point[m], &point[k]);
        let mut next = vec![ring.zero(); h.len() + 1];
        for (i, x) in h.iter().enumerate() {
            ring.add_assign(&mut next[i + 1], x);
            ring.add_assign(&mut next[i], &ring.mul(x, &c));
        }
        h = next;
    }
    // w = T / h(w) as a series in T, by fixed-point iteration
    let mut w = vec![ring.zero(); len];
    for _ in 0..len {
        let mut hw = vec![ring.zero(); len];
        for c in h.iter().rev() {
            hw = series_mul(ring, &hw, &w, len);
            ring.add_assign(&mut hw[0], c);
        }
        let inv = series_inv(ring, &hw, len)?;
        let mut next = vec![ring.zero(); len];
        next[1..len].clone_from_slice(&inv[..len - 1]);
        w = next;
    }
    // dw/dT
    let dw: Vec<R::Elem> = (0..len)
        .map(|k| {
            if k + 1 < len {
                ring.mul(&w[k + 1], &ring.from_i64(k as i64 + 1))
            } else {
                ring.zero()
            }
        })
        .collect();
    let dw = &dw[..len - 1];
    // T = u^2 / c^2 and w_j = 2 w'(T) / (c (x - z_j)) du
    let cinv = ring.inv(scale).ok_or_else(|| Error::NotAUnit("local parameter scale".into()))?;
    let c2inv = ring.mul(&cinv, &cinv);
    let two_over_c = ring.mul(&ring.from_i64(2), &cinv);
    let to_u = |s: &[R::Elem], val: i64| -> Laurent<R> {
        let mut coeffs = Vec::with_capacity(2 * s.len());
        let mut pw = ring.one();
        for (k, x) in s.iter().enumerate() {
            coeffs.push(ring.mul(x, &pw));
            if k + 1 < s.len() {
                coeffs.push(ring.zero());
            }
            pw = ring.mul(&pw, &c2inv);
        }
        Laurent { val, coeffs }
    };
    let mut out = Vec::with_capacity(n - 1);
    for j in 0..n - 1 {
        if j == m {
            // x - z_m = w = T (w_1 + w_2 T + ...)
            let tail = series_inv(ring, &w[1..], len - 1)?;
            let s: Vec<R::Elem> = series_mul(ring, dw, &tail, len - 1)
                .iter()
                .map(|x| ring.mul(x, &two_over_c))
                .collect();
            // 1/T = c^2 u^{-2}
            let mut l = to_u(&s, -2);
            let c2 = ring.mul(scale, scale);
            for x in l.coeffs.iter_mut() {
                *x = ring.mul(x, &c2);
            }
            out.push(l);
        } else {
            let mut xz = w[..len - 1].to_vec();
            ring.add_assign(&mut xz[0], &ring.sub(&point[m], &point[j]));
            let inv = series_inv(ring, &xz, len - 1)?;
            let s: Vec<R::Elem> = series_mul(ring, dw, &inv, len - 1)
                .iter()
                .map(|x| ring.mul(x, &two_over_c))
                .collect();
            out.push(to_u(&s, 0));
        }
    }
    Ok(out)
}

/// Pairing matrix over a ring with the needed inverses, for a given scale of
/// the local parameter.
pub fn pairing_matrix<R: Ring>(ring: &R, point: &[R::Elem], scale: &R::Elem) -> Result<Mat<R::Elem>> {
    let n = point.len();
    let g = (n - 1) / 2;
    let terms = 3 * g + 3; // 6g + 6 terms in u
    let mut p = vec![vec![ring.zero(); n - 1]; n - 1];
    for m in 0..n {
        let forms = local_forms(ring, point, m, scale, terms)?;
        for phi in &forms {
            // second kind: the residue and the odd part vanish
            for e in [-1i64, 1] {
                if !ring.is_zero(&phi.coeff(ring, e)?) {
                    return Err(Error::InsufficientTruncation(format!("odd coefficient u^{e}")));
                }
            }
        }
        let prims = forms.iter().map(|f| f.integrate(ring)).collect::<Result<Vec<_>>>()?;
        for j in 0..n - 1 {
            for k in 0..n - 1 {
                let prod = prims[j].mul(ring, &forms[k]);
                let res = prod.coeff(ring, -1)?;
                ring.add_assign(&mut p[j][k], &res);
            }
        }
    }
    Ok(p)
}

/// Pairing at an integer point over the rationals, local parameter `y`.
pub fn poincare_pairing(point: &[i64]) -> Result<Mat<BigRational>> {
    let pt: Vec<BigRational> = point.iter().map(|&v| Rationals.from_i64(v)).collect();
    pairing_matrix(&Rationals, &pt, &Rationals.one())
}

/// `d/dz_i P` from dual numbers, and `SIGMA (M P + P M^T)` from the connection.
pub fn leibniz_sides(point: &[i64], i: usize) -> Result<(Mat<BigRational>, Mat<BigRational>)> {
    let d = Dual(Rationals);
    let pt: Vec<_> = point
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let base = Rationals.from_i64(v);
            if k == i {
                (base, Rationals.one())
            } else {
                d.lift(base)
            }
        })
        .collect();
    let pd = pairing_matrix(&d, &pt, &d.one())?;
    let deriv: Mat<BigRational> = pd.iter().map(|r| r.iter().map(|x| x.1.clone()).collect()).collect();
    let p: Mat<BigRational> = pd.iter().map(|r| r.iter().map(|x| x.0.clone()).collect()).collect();
    let q = Rationals;
    let qpt: Vec<BigRational> = point.iter().map(|&v| q.from_i64(v)).collect();
    let m: Mat<BigRational> = gm_matrix(&q, point.len(), i)?
        .iter()
        .map(|row| row.iter().map(|e| e.eval(&qpt)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let rhs = mat_add(&q, &mat_mul(&q, &m, &p), &mat_mul(&q, &p, &transpose(&m)));
    let s = q.from_i64(SIGMA);
    let rhs = rhs.iter().map(|r| r.iter().map(|x| x * &s).collect()).collect();
    Ok((deriv, rhs))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LagrangianReport {
    pub point: Vec<i64>,
    pub modulus: Modulus,
    pub skew: bool,
    pub det_unit: bool,
    /// `q_l^T adj(P) q_m mod p^s` for `l < m`.
    pub values: Vec<u64>,
    pub pass: bool,
}

/// The Lagrangian congruences `q_l^T adj(P) q_m = 0 mod p^s`.
pub fn lagrangian_check(p: u64, s: u32, g: usize, point: &[i64]) -> Result<LagrangianReport> {
    let n = 2 * g + 1;
    if point.len() != n {
        return Err(Error::InvalidPoint(format!("expected {n} coordinates")));
    }
    let ring = Zmod::new(p, s)?;
    let modulus = ring.modulus();
    let pair = poincare_pairing(point)?;
    let skew = (0..n - 1).all(|j| (0..n - 1).all(|k| pair[j][k] == -pair[k][j].clone()));
    let pm: Mat<u64> = pair
        .iter()
        .map(|r| r.iter().map(|x| ring.reduce_rational(x)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let det = det_laplace(&ring, &pm);
    if !modulus.is_unit(det) {
        return Err(Error::DetNotUnit);
    }
    let adj = adjugate(&ring, &pm);
    let qs = q_solutions(p, s, g)?;
    let pt: Vec<u64> = point.iter().map(|&v| modulus.reduce_i64(v)).collect();
    let vals = qs.eval(&pt);
    let mut values = Vec::new();
    for l in 0..g {
        for m in l + 1..g {
            let ql = &vals[l][..n - 1];
            let qm = &vals[m][..n - 1];
            let mut acc = 0u64;
            for j in 0..n - 1 {
                for k in 0..n - 1 {
                    acc = ring.add(&acc, &ring.mul(&ql[j], &ring.mul(&adj[j][k], &qm[k])));
                }
            }
            values.push(acc);
        }
    }
    let pass = skew && values.iter().all(|&v| v == 0);
    Ok(LagrangianReport {
        point: point.to_vec(),
        modulus,
        skew,
        det_unit: true,
        values,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skew_and_nondegenerate() {
        let p = poincare_pairing(&[0, 1, 2]).unwrap();
        assert_eq!(p[0][0], Rationals.zero());
        assert_eq!(p[0][1], -p[1][0].clone());
        assert_ne!(det_laplace(&Rationals, &p), Rationals.zero());
        let p5 = poincare_pairing(&[0, 1, 3, 7, -2]).unwrap();
        for j in 0..4 {
            for k in 0..4 {
                assert_eq!(p5[j][k], -p5[k][j].clone());
            }
        }
        assert_ne!(det_laplace(&Rationals, &p5), Rationals.zero());
    }

    #[test]
    fn parameter_scale_invariance() {
        let pt: Vec<BigRational> = [0, 1, 3, 7, -2].iter().map(|&v| Rationals.from_i64(v)).collect();
        let a = pairing_matrix(&Rationals, &pt, &Rationals.one()).unwrap();
        let b = pairing_matrix(&Rationals, &pt, &Rationals.from_i64(2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn leibniz_identity() {
        for i in 0..5 {
            let (lhs, rhs) = leibniz_sides(&[0, 1, 3, 7, -2], i).unwrap();
            assert_eq!(lhs, rhs);
        }
    }
}
