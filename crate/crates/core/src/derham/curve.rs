//! Reduction of forms `P(x) dx / y^{2k+1}` on `y^2 = f(x) = prod (x - z_k)`
//! to the basis `[w_1], ..., [w_{n-1}]`, `w_j = dx / ((x - z_j) y)`.

use crate::error::{Error, Result};
use crate::exactring::linalg::{solve_unit_pivot, transpose, Mat};
use crate::exactring::{Ring, SparsePoly, UniPoly};

/// The curve `y^2 = f(x)` at a specialized point.
#[derive(Clone, Debug)]
pub struct CurveData<R: Ring> {
    ring: R,
    point: Vec<R::Elem>,
    f: UniPoly<R>,
    df: UniPoly<R>,
    /// `a f + bez_b f' = 1` for some `a`.
    bez_b: UniPoly<R>,
    /// Rows: monomial coordinates of `[w_j]`, `j < n`.
    transition: Mat<R::Elem>,
}

/// A form `P(x) dx / y^{2k+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FormRep<R: Ring> {
    pub numerator: UniPoly<R>,
    pub k: u32,
}

impl<R: Ring> FormRep<R> {
    pub fn new(numerator: UniPoly<R>, k: u32) -> Self {
        FormRep { numerator, k }
    }

    /// Specializes a numerator given in `z_1..z_n, x`.
    pub fn from_sparse(p: &SparsePoly<R>, point: &[R::Elem], k: u32) -> Self {
        let values: Vec<(usize, R::Elem)> = point.iter().cloned().enumerate().collect();
        FormRep::new(UniPoly::from_sparse(&p.specialize(&values)), k)
    }
}

/// Coordinates in the basis `[w_1], ..., [w_{n-1}]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CohClass<R: Ring> {
    pub coeffs: Vec<R::Elem>,
}

impl<R: Ring> CohClass<R> {
    pub fn is_zero(&self, ring: &R) -> bool {
        self.coeffs.iter().all(|c| ring.is_zero(c))
    }
}

impl<R: Ring> CurveData<R> {
    pub fn new(ring: R, point: Vec<R::Elem>) -> Result<Self> {
        let n = point.len();
        if n < 3 || n % 2 == 0 {
            return Err(Error::InvalidPoint(format!("need an odd number >= 3 of branch points, got {n}")));
        }
        for i in 0..n {
            for j in 0..i {
                if ring.inv(&ring.sub(&point[i], &point[j])).is_none() {
                    return Err(Error::NonInvertibleDifference { i: j + 1, j: i + 1 });
                }
            }
        }
        let f = point.iter().fold(UniPoly::constant(ring.clone(), ring.one()), |acc, a| {
            acc.mul(&UniPoly::linear(ring.clone(), a))
        });
        let df = f.derivative();
        let (_, bez_b) = bezout(&ring, &f, &df)?;
        let mut curve = CurveData {
            ring,
            point,
            f,
            df,
            bez_b,
            transition: Vec::new(),
        };
        let transition = (0..n - 1)
            .map(|j| curve.reduce_monomial(&curve.omega_form(j)))
            .collect::<Result<Mat<R::Elem>>>()?;
        curve.transition = transition;
        Ok(curve)
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn point(&self) -> &[R::Elem] {
        &self.point
    }

    pub fn n(&self) -> usize {
        self.point.len()
    }

    pub fn genus(&self) -> usize {
        (self.n() - 1) / 2
    }

    pub fn f(&self) -> &UniPoly<R> {
        &self.f
    }

    pub fn df(&self) -> &UniPoly<R> {
        &self.df
    }

    /// `f / (x - z_j)`.
    pub fn cofactor(&self, j: usize) -> UniPoly<R> {
        let (q, _) = self
            .f
            .div_rem(&UniPoly::linear(self.ring.clone(), &self.point[j]))
            .expect("monic divisor");
        q
    }

    /// `w_j = (f / (x - z_j)) dx / y^3`.
    pub fn omega_form(&self, j: usize) -> FormRep<R> {
        FormRep::new(self.cofactor(j), 1)
    }

    /// Class in the monomial basis `x^k dx / y`, `k < 2g`.
    pub fn reduce_monomial(&self, form: &FormRep<R>) -> Result<Vec<R::Elem>> {
        let r = &self.ring;
        let mut p = form.numerator.clone();
        let mut k = form.k;
        while k > 0 {
            // P = u f + v f' with v = P B mod f
            let (_, v) = p.mul(&self.bez_b).div_rem(&self.f)?;
            let (u, rem) = p.sub(&v.mul(&self.df)).div_rem(&self.f)?;
            debug_assert!(rem.is_zero());
            let odd = r.from_i64(2 * k as i64 - 1);
            let c = r
                .inv(&odd)
                .ok_or_else(|| Error::DivisionByP(format!("lowering the pole order from {}", 2 * k + 1)))?;
            // v f' dx/y^{2k+1} = 2/(2k-1) v' dx/y^{2k-1} + exact
            p = u.add(&v.derivative().scale(&r.mul(&c, &r.from_i64(2))));
            k -= 1;
        }
        let n = self.n();
        let top = n - 1;
        let half = r
            .inv(&r.from_i64(2))
            .ok_or_else(|| Error::DivisionByP("inverting 2".into()))?;
        while let Some(d) = p.degree() {
            if d < top {
                break;
            }
            // d(x^m y) = (m x^{m-1} f + x^m f'/2) dx/y, leading coefficient m + n/2
            let m = d + 1 - n;
            let lead = r.mul(&r.from_i64(2 * m as i64 + n as i64), &half);
            let li = r
                .inv(&lead)
                .ok_or_else(|| Error::DivisionByP(format!("reducing x^{d} dx/y")))?;
            let c = r.mul(&p.coeff(d), &li);
            let mut exact = self.df.shift(m).scale(&half);
            if m > 0 {
                exact = exact.add(&self.f.shift(m - 1).scale(&r.from_i64(m as i64)));
            }
            p = p.sub(&exact.scale(&c));
        }
        Ok((0..top).map(|k| p.coeff(k)).collect())
    }

    /// Class in the basis `[w_1], ..., [w_{n-1}]`.
    pub fn reduce(&self, form: &FormRep<R>) -> Result<CohClass<R>> {
        let c = self.reduce_monomial(form)?;
        let rhs: Mat<R::Elem> = c.into_iter().map(|x| vec![x]).collect();
        let sol = solve_unit_pivot(&self.ring, &transpose(&self.transition), &rhs)?;
        Ok(CohClass {
            coeffs: sol.into_iter().map(|mut r| r.remove(0)).collect(),
        })
    }

    /// Monomial coordinates of the basis classes.
    pub fn transition(&self) -> &Mat<R::Elem> {
        &self.transition
    }

    /// `d(x^a y^b)` for `b = 1` or `b = -1`, as a form.
    pub fn exact_form(&self, a: usize, b: i32) -> FormRep<R> {
        let r = &self.ring;
        let half = r.inv(&r.from_i64(2)).expect("p odd");
        let fprime_part = self.df.shift(a).scale(&half);
        let f_part = if a > 0 {
            self.f.shift(a - 1).scale(&r.from_i64(a as i64))
        } else {
            UniPoly::zero(r.clone())
        };
        match b {
            // d(x^a y) = (a x^{a-1} f + x^a f'/2) dx / y
            1 => FormRep::new(f_part.add(&fprime_part), 0),
            // d(x^a / y) = (a x^{a-1} f - x^a f'/2) dx / y^3
            -1 => FormRep::new(f_part.sub(&fprime_part), 1),
            _ => panic!("exponent must be 1 or -1"),
        }
    }
}

/// Solves `a f + b g = 1` with `deg a < deg g`, `deg b < deg f` via the Sylvester system.
fn bezout<R: Ring>(ring: &R, f: &UniPoly<R>, g: &UniPoly<R>) -> Result<(UniPoly<R>, UniPoly<R>)> {
    let df = f.degree().unwrap_or(0);
    let dg = g.degree().unwrap_or(0);
    let size = df + dg;
    // unknowns: a_0..a_{dg-1}, b_0..b_{df-1}
    let mut m: Mat<R::Elem> = vec![vec![ring.zero(); size]; size];
    for r in 0..dg {
        for (k, c) in f.coeffs().iter().enumerate() {
            m[r + k][r] = c.clone();
        }
    }
    for r in 0..df {
        for (k, c) in g.coeffs().iter().enumerate() {
            m[r + k][dg + r] = c.clone();
        }
    }
    let mut rhs = vec![vec![ring.zero()]; size];
    rhs[0][0] = ring.one();
    let sol = solve_unit_pivot(ring, &m, &rhs)
        .map_err(|_| Error::NotAUnit("discriminant of f".into()))?;
    let a = UniPoly::new(ring.clone(), sol[..dg].iter().map(|r| r[0].clone()).collect());
    let b = UniPoly::new(ring.clone(), sol[dg..].iter().map(|r| r[0].clone()).collect());
    Ok((a, b))
}

/// Reduction of a form to the basis `[w_1..w_{n-1}]`.
pub fn reduce_to_basis<R: Ring>(form: &FormRep<R>, curve: &CurveData<R>) -> Result<CohClass<R>> {
    curve.reduce(form)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactring::{Rationals, Zmod};

    fn curve_q(pt: &[i64]) -> CurveData<Rationals> {
        CurveData::new(Rationals, pt.iter().map(|&v| Rationals.from_i64(v)).collect()).unwrap()
    }

    #[test]
    fn sum_of_basis_forms_is_exact() {
        for pt in [&[0, 1, 2][..], &[0, 1, 3, 7, -2]] {
            let c = curve_q(pt);
            let sum = (0..c.n()).fold(UniPoly::zero(Rationals), |acc, j| acc.add(&c.cofactor(j)));
            assert!(c.reduce(&FormRep::new(sum, 1)).unwrap().is_zero(&Rationals));
        }
    }

    #[test]
    fn exact_family_dies() {
        let c = curve_q(&[0, 1, 3, 7, -2]);
        for a in 0..=2 * c.genus() + 1 {
            for b in [1, -1] {
                let cls = c.reduce(&c.exact_form(a, b)).unwrap();
                assert!(cls.is_zero(&Rationals), "d(x^{a} y^{b})");
            }
        }
    }

    #[test]
    fn basis_roundtrip() {
        let c = curve_q(&[2, 5, 11]);
        for j in 0..2 {
            let cls = c.reduce(&c.omega_form(j)).unwrap();
            for (k, x) in cls.coeffs.iter().enumerate() {
                assert_eq!(*x, Rationals.from_i64((j == k) as i64));
            }
        }
        // w_n = -(w_1 + ... + w_{n-1})
        let last = c.reduce(&c.omega_form(2)).unwrap();
        assert!(last.coeffs.iter().all(|x| *x == Rationals.from_i64(-1)));
    }

    #[test]
    fn mod_p_power_reduction() {
        let z = Zmod::new(7, 2).unwrap();
        let c = CurveData::new(z, vec![0, 1, 2, 3, 4]).unwrap();
        for a in 0..=5 {
            match c.reduce(&c.exact_form(a, 1)) {
                Ok(cls) => assert!(cls.is_zero(&z)),
                // 2a + 5 = 7 cannot be inverted
                Err(e) => assert!(a == 1 && matches!(e, Error::DivisionByP(_))),
            }
        }
        assert!(c.reduce(&c.exact_form(3, -1)).unwrap().is_zero(&z));
    }
}
