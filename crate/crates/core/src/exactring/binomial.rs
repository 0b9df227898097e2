//! Coefficients of products of powers of linear forms `prod_k (x - z_k)^{e_k}`.

use super::poly::{Monomial, SparsePoly, VarSet};
use super::ring::Ring;

/// `C(m, 0), ..., C(m, m)` computed in the ring by Pascal's rule.
pub fn binomial_row<R: Ring>(ring: &R, m: usize) -> Vec<R::Elem> {
    let mut row = vec![ring.one()];
    for k in 1..=m {
        let mut next = Vec::with_capacity(k + 1);
        next.push(ring.one());
        for j in 1..k {
            next.push(ring.add(&row[j - 1], &row[j]));
        }
        next.push(ring.one());
        row = next;
    }
    row
}

/// Calls `f` on every `beta` with `beta_k <= bounds[k]` and `sum beta = total`.
pub fn for_each_bounded_composition(bounds: &[u32], total: u32, mut f: impl FnMut(&[u32])) {
    let n = bounds.len();
    if n == 0 {
        if total == 0 {
            f(&[]);
        }
        return;
    }
    // suffix capacity
    let mut cap = vec![0u32; n + 1];
    for k in (0..n).rev() {
        cap[k] = cap[k + 1] + bounds[k];
    }
    if total > cap[0] {
        return;
    }
    let mut beta = vec![0u32; n];
    fn rec(
        k: usize,
        rest: u32,
        bounds: &[u32],
        cap: &[u32],
        beta: &mut [u32],
        f: &mut dyn FnMut(&[u32]),
    ) {
        let n = bounds.len();
        if k == n - 1 {
            beta[k] = rest;
            f(beta);
            return;
        }
        let lo = rest.saturating_sub(cap[k + 1]);
        let hi = rest.min(bounds[k]);
        for b in lo..=hi {
            beta[k] = b;
            rec(k + 1, rest - b, bounds, cap, beta, f);
        }
    }
    rec(0, total, bounds, &cap, &mut beta, &mut f);
}

/// Number of compositions counted by [`for_each_bounded_composition`], saturating.
pub fn count_bounded_compositions(bounds: &[u32], total: u32) -> u64 {
    let mut ways = vec![0u64; total as usize + 1];
    ways[0] = 1;
    for &b in bounds {
        let mut next = vec![0u64; total as usize + 1];
        for (t, w) in ways.iter().enumerate() {
            if *w == 0 {
                continue;
            }
            for j in 0..=b as usize {
                if t + j > total as usize {
                    break;
                }
                next[t + j] = next[t + j].saturating_add(*w);
            }
        }
        ways = next;
    }
    ways[total as usize]
}

/// Coefficient of `x^degree` in `prod_k (x - z_k)^{exps[k]}` as a polynomial in `z`.
///
/// Every term is `prod_k C(e_k, b_k) (-z_k)^{b_k}` with `sum b = sum e - degree`.
pub fn linear_product_coefficient<R: Ring>(ring: &R, exps: &[u32], degree: u32) -> SparsePoly<R> {
    let n = exps.len();
    let vars = VarSet::z(n);
    let total: u32 = exps.iter().sum();
    if degree > total {
        return SparsePoly::zero(ring.clone(), vars);
    }
    let rows: Vec<Vec<R::Elem>> = exps
        .iter()
        .map(|&e| {
            let mut row = binomial_row(ring, e as usize);
            for (j, c) in row.iter_mut().enumerate() {
                if j % 2 == 1 {
                    *c = ring.neg(c);
                }
            }
            row
        })
        .collect();
    let mut terms = Vec::new();
    for_each_bounded_composition(exps, total - degree, |beta| {
        let mut c = ring.one();
        for (k, &b) in beta.iter().enumerate() {
            c = ring.mul(&c, &rows[k][b as usize]);
            if ring.is_zero(&c) {
                return;
            }
        }
        let m = Monomial(beta.iter().map(|&b| b as u16).collect());
        terms.push((m, c));
    });
    SparsePoly::from_terms(ring.clone(), vars, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactring::ring::Integers;
    use num_bigint::BigInt;

    #[test]
    fn binomials() {
        let row = binomial_row(&Integers, 5);
        let want: Vec<BigInt> = [1, 5, 10, 10, 5, 1].iter().map(|&v| v.into()).collect();
        assert_eq!(row, want);
    }

    #[test]
    fn composition_count_matches_enumeration() {
        let bounds = [3, 1, 4, 2];
        for total in 0..=11 {
            let mut c = 0;
            for_each_bounded_composition(&bounds, total, |_| c += 1);
            assert_eq!(c, count_bounded_compositions(&bounds, total));
        }
    }

    #[test]
    fn matches_expanded_product() {
        let exps = [2u32, 1, 3];
        let vars = VarSet::zx(3);
        let x = SparsePoly::var(Integers, vars.clone(), 3);
        let mut prod = SparsePoly::one(Integers, vars.clone());
        for (k, &e) in exps.iter().enumerate() {
            let lin = x.sub(&SparsePoly::var(Integers, vars.clone(), k));
            prod = prod.mul(&lin.pow(e as u64, None));
        }
        for d in 0..=6 {
            assert!(linear_product_coefficient(&Integers, &exps, d).equals(&prod.coeff_of(3, d as u16)));
        }
    }
}
