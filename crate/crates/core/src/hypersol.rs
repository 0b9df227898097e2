//! The master polynomial and its p^s-hypergeometric solutions `Q^{s,l}`.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::exactring::binomial::{count_bounded_compositions, for_each_bounded_composition, binomial_row};
use crate::exactring::linalg::{howell_form, in_span, rank_mod_p};
use crate::exactring::{Cutoff, DiagRational, Modulus, Monomial, Ring, SparsePoly, UniPoly, VarSet, Zmod};
use crate::kzsystem::{kz_residuals, residual_valuation, KzVector};

/// `Phi_s = (prod_k (x - z_k))^{(p^s-1)/2}`, kept in factored form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MasterPolynomial {
    pub p: u64,
    pub s: u32,
    pub n: usize,
    exponent: u32,
}

pub fn master_polynomial(p: u64, s: u32, n: usize) -> Result<MasterPolynomial> {
    let m = Modulus::new(p, s)?;
    if n < 3 || n % 2 == 0 {
        return Err(Error::InvalidIndex(format!("n = {n} must be odd and at least 3")));
    }
    let exponent = u32::try_from((m.value() - 1) / 2)
        .map_err(|_| Error::BudgetOverflow { p, s })?;
    Ok(MasterPolynomial { p, s, n, exponent })
}

impl MasterPolynomial {
    /// `(p^s - 1)/2`.
    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn x_degree(&self) -> u32 {
        self.n as u32 * self.exponent
    }

    /// Coefficient of `x^k` as a polynomial in `z`.
    pub fn x_coefficient<R: Ring>(&self, ring: &R, k: u32) -> SparsePoly<R> {
        let exps = vec![self.exponent; self.n];
        crate::exactring::binomial::linear_product_coefficient(ring, &exps, k)
    }

    /// Full expansion in `z_1..z_n, x` by powering; only for small parameters.
    pub fn expand<R: Ring>(&self, ring: &R, cutoff: Option<Cutoff>) -> SparsePoly<R> {
        let vars = VarSet::zx(self.n);
        let x = SparsePoly::var(ring.clone(), vars.clone(), self.n);
        let f = (0..self.n).fold(SparsePoly::one(ring.clone(), vars.clone()), |acc, k| {
            acc.mul(&x.sub(&SparsePoly::var(ring.clone(), vars.clone(), k)))
        });
        f.pow(self.exponent as u64, cutoff)
    }

    /// `Phi_s` at a point, as a polynomial in `x`.
    pub fn specialize<R: Ring>(&self, ring: &R, point: &[R::Elem]) -> UniPoly<R> {
        let f = point.iter().fold(UniPoly::constant(ring.clone(), ring.one()), |acc, a| {
            acc.mul(&UniPoly::linear(ring.clone(), a))
        });
        let mut out = UniPoly::constant(ring.clone(), ring.one());
        for _ in 0..self.exponent {
            out = out.mul(&f);
        }
        out
    }

    /// Number of monomials across `x^k` coefficients for `k` in `range`.
    fn window_size(&self, range: std::ops::RangeInclusive<u32>) -> u64 {
        let bounds = vec![self.exponent; self.n];
        let d = self.x_degree();
        range
            .map(|k| count_bounded_compositions(&bounds, d - k))
            .fold(0u64, |a, b| a.saturating_add(b))
    }
}

/// How the quotient coefficient was extracted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DivisionRoute {
    /// Sum over `x^k`, `k <= N`, with division by powers of `z_i`; the
    /// vanishing of all negative powers certifies a zero remainder.
    BottomUp,
    /// Sum over `x^k`, `k > N`; the remainder is checked at random points.
    TopDown,
}

/// Coefficient of `x^target` in `Phi_s / (x - z_i)` (0-based `i`), reduced mod the ring.
pub fn quotient_coefficient(
    mp: &MasterPolynomial,
    ring: &Zmod,
    i: usize,
    target: u32,
    route: DivisionRoute,
) -> Result<SparsePoly<Zmod>> {
    let n = mp.n;
    let d = mp.x_degree();
    let m = mp.exponent;
    let bounds = vec![m; n];
    let row: Vec<u64> = binomial_row(ring, m as usize)
        .into_iter()
        .enumerate()
        .map(|(j, c)| if j % 2 == 1 { ring.neg(&c) } else { c })
        .collect();
    let vars = VarSet::z(n);
    let offset = target as i64 + 1;
    let mut acc: FxHashMap<SmallVec<[u16; 8]>, u64> = FxHashMap::default();
    let ks: Vec<u32> = match route {
        DivisionRoute::BottomUp => (0..=target.min(d)).collect(),
        DivisionRoute::TopDown => (target + 1..=d).collect(),
    };
    for k in ks {
        let shift = k as i64 - target as i64 - 1;
        for_each_bounded_composition(&bounds, d - k, |beta| {
            let mut c = 1u64;
            for &b in beta {
                c = ring.mul(&c, &row[b as usize]);
            }
            if c == 0 {
                return;
            }
            let mut e: SmallVec<[u16; 8]> = beta.iter().map(|&b| b as u16).collect();
            // store the z_i exponent with an offset so negative powers fit
            e[i] = (beta[i] as i64 + shift + offset) as u16;
            let slot = acc.entry(e).or_insert(0);
            *slot = ring.add(slot, &c);
        });
    }
    let mut terms = Vec::with_capacity(acc.len());
    for (mut e, c) in acc {
        if c == 0 {
            continue;
        }
        let ei = e[i] as i64 - offset;
        if ei < 0 {
            return Err(Error::DegenerateRegime(format!(
                "nonzero remainder dividing by x - z_{}",
                i + 1
            )));
        }
        e[i] = ei as u16;
        terms.push((Monomial(e), c));
    }
    let p = SparsePoly::from_terms(*ring, vars, terms);
    Ok(match route {
        DivisionRoute::BottomUp => p.neg(),
        DivisionRoute::TopDown => p,
    })
}

/// Random-point check of a top-down quotient: the numerical division of
/// `Phi_s(x)` by `x - a_i` must leave no remainder and reproduce the coefficient.
fn spot_check(
    mp: &MasterPolynomial,
    ring: &Zmod,
    i: usize,
    target: u32,
    coeff: &SparsePoly<Zmod>,
    seed: u64,
) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pk = ring.modulus().value();
    let point: Vec<u64> = (0..mp.n).map(|_| rng.gen_range(0..pk)).collect();
    let phi = mp.specialize(ring, &point);
    let (q, r) = phi.div_rem(&UniPoly::linear(*ring, &point[i]))?;
    if !r.is_zero() {
        return Err(Error::DegenerateRegime("nonzero remainder at a sample point".into()));
    }
    if q.coeff(target as usize) != coeff.eval(&point) {
        return Err(Error::DegenerateRegime(format!(
            "quotient coefficient mismatch for entry {}",
            i + 1
        )));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct HyperSolutionSet {
    pub p: u64,
    pub s: u32,
    pub g: usize,
    /// Modulus the coefficients are reduced by (usually `p^s`).
    pub ring: Zmod,
    /// `Q^{s,1}, ..., Q^{s,g}`.
    pub vectors: Vec<KzVector<SparsePoly<Zmod>>>,
    pub routes: Vec<DivisionRoute>,
}

impl HyperSolutionSet {
    /// Values at a point, as a `g x n` matrix of residues.
    pub fn eval(&self, point: &[u64]) -> Vec<Vec<u64>> {
        let pt: Vec<u64> = point.iter().map(|&a| a % self.ring.modulus().value()).collect();
        self.vectors
            .iter()
            .map(|v| v.entries().iter().map(|e| e.eval(&pt)).collect())
            .collect()
    }

    /// Homogeneous total degree of every entry of `Q^{s,l}`.
    pub fn entry_degree(&self, l: usize) -> i64 {
        let mp = master_polynomial(self.p, self.s, 2 * self.g + 1).expect("valid");
        mp.x_degree() as i64 - (l as i64) * mp_pow(self.p, self.s) as i64
    }
}

fn mp_pow(p: u64, s: u32) -> u64 {
    p.pow(s)
}

fn regime_check(p: u64, s: u32, g: usize) -> Result<Modulus> {
    if g == 0 {
        return Err(Error::InvalidIndex("genus must be at least 1".into()));
    }
    let m = Modulus::new(p, s)?;
    let n = 2 * g as u64 + 1;
    if m.value() < n {
        return Err(Error::DegenerateRegime(format!(
            "l p^s - 1 = {} exceeds the x-degree {} of Phi_s/(x - z_i)",
            g as u64 * m.value() - 1,
            n * (m.value() - 1) / 2 - 1
        )));
    }
    Ok(m)
}

/// `Q^{s,l}` for `l = 1..g`, reduced mod `p^s`.
pub fn q_solutions(p: u64, s: u32, g: usize) -> Result<HyperSolutionSet> {
    let m = regime_check(p, s, g)?;
    q_solutions_in(p, s, g, Zmod(m))
}

/// `Q^{s,l}` computed with coefficients in a given `Z/p^k` (e.g. `k = s + 1`
/// to measure residual valuations).
pub fn q_solutions_in(p: u64, s: u32, g: usize, ring: Zmod) -> Result<HyperSolutionSet> {
    let m = regime_check(p, s, g)?;
    if ring.modulus().p() != p {
        return Err(Error::InvalidModulus("coefficient ring has the wrong prime".into()));
    }
    let n = 2 * g + 1;
    let mp = master_polynomial(p, s, n)?;
    let d = mp.x_degree();
    let mut vectors = Vec::with_capacity(g);
    let mut routes = Vec::with_capacity(g);
    for l in 1..=g {
        let target = (l as u64 * m.value() - 1) as u32;
        if target > d - 1 {
            return Err(Error::DegenerateRegime(format!("l = {l} beyond the quotient degree")));
        }
        let bottom = mp.window_size(0..=target);
        let top = mp.window_size(target + 1..=d);
        let route = if bottom <= 4 * top {
            DivisionRoute::BottomUp
        } else {
            DivisionRoute::TopDown
        };
        let entries = (0..n)
            .into_par_iter()
            .map(|i| {
                let c = quotient_coefficient(&mp, &ring, i, target, route)?;
                if route == DivisionRoute::TopDown {
                    for seed in 0..2 {
                        spot_check(&mp, &ring, i, target, &c, seed * 7919 + i as u64)?;
                    }
                }
                Ok(c)
            })
            .collect::<Result<Vec<_>>>()?;
        // the entries sum to (l p^s / m) times a coefficient of Phi_s: zero mod p^s only
        let total = entries[1..].iter().fold(entries[0].clone(), |a, b| a.add(b));
        if total.terms().iter().any(|(_, c)| ring.valuation(c) < s) {
            return Err(Error::SumNotZero);
        }
        vectors.push(KzVector::new_unchecked(entries));
        routes.push(route);
    }
    Ok(HyperSolutionSet {
        p,
        s,
        g,
        ring,
        vectors,
        routes,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KzCongruenceReport {
    pub p: u64,
    pub s: u32,
    pub g: usize,
    /// Least valuation of the cleared KZ residuals, computed mod `p^{s+1}`;
    /// `None` when every residual vanishes there.
    pub residual_valuation_min: Option<u32>,
    /// The same minimum restricted to equation `i`.
    pub per_equation: Vec<Option<u32>>,
    pub residuals_ok: bool,
    /// Rank mod `p` of `(Q^{s,l}_i)` at each sample point.
    pub ranks: Vec<usize>,
    pub pass: bool,
}

/// Symbolic KZ residuals for every `(l, i)` and ranks at the given points.
pub fn verify_kz_congruences(p: u64, s: u32, g: usize, points: &[Vec<u64>]) -> Result<KzCongruenceReport> {
    let n = 2 * g + 1;
    if p <= n as u64 {
        return Err(Error::DegenerateRegime(format!("verification requires p > n = {n}")));
    }
    let fine = Zmod::new(p, s + 1)?;
    let sols = q_solutions_in(p, s, g, fine)?;
    let mut per_equation: Vec<Option<u32>> = vec![None; n];
    for v in &sols.vectors {
        let dv = KzVector::new_unchecked(v.entries().iter().cloned().map(DiagRational::from_poly).collect());
        for (i, r) in kz_residuals(&dv)?.iter().enumerate() {
            if let Some(val) = residual_valuation(r) {
                per_equation[i] = Some(per_equation[i].map_or(val, |x| x.min(val)));
            }
        }
    }
    let vmin = per_equation.iter().flatten().min().copied();
    let residuals_ok = vmin.is_none_or(|v| v >= s);
    let coarse = q_solutions(p, s, g)?;
    let ranks: Vec<usize> = points
        .iter()
        .map(|pt| rank_mod_p(&coarse.ring.modulus(), &coarse.eval(pt)))
        .collect();
    let pass = residuals_ok && ranks.iter().all(|&r| r == g);
    Ok(KzCongruenceReport {
        p,
        s,
        g,
        residual_valuation_min: vmin,
        per_equation,
        residuals_ok,
        ranks,
        pass,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LimitReport {
    pub p: u64,
    pub s: u32,
    pub g: usize,
    /// `membership[k][l]` for point `k` and `Q^{s+1,l+1}`.
    pub membership: Vec<Vec<bool>>,
    pub pass: bool,
}

/// `Q^{s+1,l}(pt) mod p^s` lies in the span of the `Q^{s,m}(pt)`.
pub fn limit_consistency(p: u64, s: u32, g: usize, points: &[Vec<u64>]) -> Result<LimitReport> {
    let modulus = Modulus::new(p, s)?;
    for pt in points {
        crate::crystalmap::check_point(p, g, pt)?;
    }
    let lower = q_solutions(p, s, g)?;
    let upper = q_solutions(p, s + 1, g)?;
    let mut membership = Vec::new();
    for pt in points {
        let span = howell_form(&modulus, &lower.eval(pt), 2 * g + 1);
        let row: Vec<bool> = upper
            .eval(pt)
            .iter()
            .map(|v| {
                let reduced: Vec<u64> = v.iter().map(|&x| x % modulus.value()).collect();
                in_span(&modulus, &span, &reduced)
            })
            .collect();
        membership.push(row);
    }
    let pass = membership.iter().flatten().all(|&b| b);
    Ok(LimitReport {
        p,
        s,
        g,
        membership,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactring::Integers;
    use num_bigint::BigInt;

    #[test]
    fn master_at_small_point() {
        let mp = master_polynomial(5, 1, 3).unwrap();
        let phi = mp.specialize(&Integers, &[0.into(), 1.into(), 2.into()]);
        let want: Vec<BigInt> = [0, 0, 4, -12, 13, -6, 1].iter().map(|&v| v.into()).collect();
        assert_eq!(phi.coeffs(), &want[..]);
    }

    #[test]
    fn master_trivial_exponent() {
        let mp = master_polynomial(3, 1, 3).unwrap();
        let full = mp.expand(&Integers, None);
        assert_eq!(full.nterms(), 8);
        assert_eq!(mp.x_coefficient(&Integers, 2).nterms(), 3);
    }

    #[test]
    fn routes_agree() {
        let mp = master_polynomial(5, 2, 3).unwrap();
        let ring = Zmod::new(5, 2).unwrap();
        for i in 0..3 {
            let a = quotient_coefficient(&mp, &ring, i, 24, DivisionRoute::BottomUp).unwrap();
            let b = quotient_coefficient(&mp, &ring, i, 24, DivisionRoute::TopDown).unwrap();
            assert!(a.equals(&b));
        }
    }

    #[test]
    fn degenerate_regime() {
        assert!(matches!(q_solutions(3, 1, 2), Err(Error::DegenerateRegime(_))));
    }

    #[test]
    fn small_values() {
        let q = q_solutions(5, 1, 1).unwrap();
        assert_eq!(q.eval(&[0, 1, 2]), vec![vec![4, 0, 1]]);
        let q2 = q_solutions(5, 1, 2).unwrap();
        assert_eq!(q2.eval(&[3, 1, 4, 1, 5])[1], vec![1; 5]);
    }
}
