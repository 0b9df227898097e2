//! Formal flat sections of the KZ connection at an ordinary point `a`:
//! `I(a + t) = sum_alpha I_alpha t^alpha` with
//! `|alpha| I_alpha = 1/2 sum_i [H_i I]_{alpha - e_i}`.

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::crystalmap::check_point;
use crate::error::{Error, Result};
use crate::exactring::linalg::{howell_form, kernel, rank_mod_p, smith, solve_in_span, Mat};
use crate::exactring::padic::{PAdic, PAdicCtx};
use crate::exactring::{Modulus, Monomial, SparsePoly, TruncSeries, VarSet, Zmod};
use crate::hypersol::q_solutions;
use crate::kzsystem::KzVector;

/// An ordinary point: distinct residues mod `p` and `det A(a)` a unit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasePoint {
    pub p: u64,
    pub g: usize,
    pub a: Vec<u64>,
}

impl BasePoint {
    pub fn new(p: u64, g: usize, a: Vec<u64>) -> Result<Self> {
        check_point(p, g, &a)?;
        Ok(BasePoint { p, g, a })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }
}

/// `ceil(log_p N) + 2`.
pub fn guard_digits(p: u64, cutoff: u32) -> u32 {
    let mut k = 0;
    let mut pk = 1u64;
    while pk < cutoff as u64 {
        pk *= p;
        k += 1;
    }
    k + 2
}

/// Exponent vectors of total degree `<= cutoff`, ordered by degree.
#[derive(Clone, Debug)]
pub struct MonomialTable {
    pub monos: Vec<Vec<u16>>,
    index: FxHashMap<Vec<u16>, usize>,
}

impl MonomialTable {
    pub fn new(n: usize, cutoff: u32) -> Self {
        let mut monos = vec![vec![0u16; n]];
        let mut layer = vec![vec![0u16; n]];
        for _ in 0..cutoff {
            let mut next = Vec::new();
            for m in &layer {
                // extend only at or after the last nonzero slot to avoid repeats
                let start = m.iter().rposition(|&e| e > 0).unwrap_or(0);
                for k in start..n {
                    let mut e = m.clone();
                    e[k] += 1;
                    next.push(e);
                }
            }
            monos.extend(next.iter().cloned());
            layer = next;
        }
        let index = monos.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        MonomialTable { monos, index }
    }

    pub fn len(&self) -> usize {
        self.monos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monos.is_empty()
    }

    pub fn get(&self, e: &[u16]) -> Option<usize> {
        self.index.get(e).copied()
    }
}

/// `1/(d + u)` with `u = t_i - t_j`: the coefficient of `t_i^r t_j^q` is
/// `(-1)^r C(r+q, r) / d^{r+q+1}`, as residues mod `p^w`.
fn pair_coefficients(m: &Modulus, d: i64, cutoff: usize) -> Result<Vec<Vec<u64>>> {
    let di = m
        .inv(m.reduce_i64(d))
        .ok_or(Error::InvalidPoint(format!("difference {d} is not a unit")))?;
    let mut binom = vec![vec![0u64; cutoff + 1]; cutoff + 1];
    for k in 0..=cutoff {
        binom[k][0] = 1;
        for r in 1..=k {
            binom[k][r] = m.add(binom[k - 1][r - 1], if r < k { binom[k - 1][r] } else { 0 });
        }
    }
    let mut pw = vec![di; cutoff + 1];
    for k in 1..=cutoff {
        pw[k] = m.mul(pw[k - 1], di);
    }
    Ok((0..=cutoff)
        .map(|r| {
            (0..=cutoff - r)
                .map(|q| {
                    let c = m.mul(binom[r + q][r], pw[r + q]);
                    if r % 2 == 1 {
                        m.neg(c)
                    } else {
                        c
                    }
                })
                .collect()
        })
        .collect())
}

/// `H_i(a + t)` as an `n x n` matrix of series mod `p^w`, exact through `cutoff`.
pub fn expand_hamiltonian(base: &BasePoint, i: usize, cutoff: u32, w: u32) -> Result<Mat<TruncSeries<Zmod>>> {
    let n = base.n();
    if i >= n {
        return Err(Error::InvalidIndex(format!("H_{} for n = {n}", i + 1)));
    }
    let ring = Zmod::new(base.p, w)?;
    let m = ring.modulus();
    let vars = VarSet::t(n);
    let zero = TruncSeries::zero(ring, n, cutoff);
    let mut out = vec![vec![zero; n]; n];
    for j in (0..n).filter(|&j| j != i) {
        let d = base.a[i] as i64 - base.a[j] as i64;
        let c = pair_coefficients(&m, d, cutoff as usize)?;
        let mut terms = Vec::new();
        for (r, row) in c.iter().enumerate() {
            for (q, &v) in row.iter().enumerate() {
                let mut e = vec![0u16; n];
                e[i] = r as u16;
                e[j] += q as u16;
                terms.push((Monomial::from_slice(&e), v));
            }
        }
        let h = TruncSeries::new(SparsePoly::from_terms(ring, vars.clone(), terms), cutoff);
        out[j][i] = out[j][i].add(&h);
        out[j][j] = out[j][j].sub(&h);
        out[i][j] = out[i][j].add(&h);
        out[i][i] = out[i][i].sub(&h);
    }
    Ok(out)
}

/// A formal solution through degree `cutoff` with tracked p-adic precision.
#[derive(Clone, Debug)]
pub struct SeriesSolution {
    pub p: u64,
    pub cutoff: u32,
    /// Target exponent `s` of the certification.
    pub s: u32,
    pub width: u32,
    pub table: MonomialTable,
    /// `coeffs[k][c]`: component `c` at monomial `table.monos[k]`.
    pub coeffs: Vec<Vec<PAdic>>,
    /// Least valuation per degree, `i32::MAX` when the degree vanishes.
    pub min_valuation: Vec<i32>,
    /// Least absolute precision over all coefficients.
    pub certified: i32,
    /// Every equation index gave the same coefficient.
    pub consistent: bool,
}

impl SeriesSolution {
    fn ctx(&self) -> PAdicCtx {
        PAdicCtx::new(self.p, self.width).expect("checked")
    }

    /// Coefficients mod `p^s`, one vector per monomial.
    pub fn residues(&self) -> Result<Vec<Vec<u64>>> {
        let ctx = self.ctx();
        self.coeffs
            .iter()
            .zip(&self.table.monos)
            .map(|(v, mono)| {
                v.iter()
                    .map(|x| {
                        ctx.to_residue(x, self.s).map_err(|e| match e {
                            Error::PrecisionExhausted { detail, .. } => Error::PrecisionExhausted {
                                degree: mono.iter().map(|&k| k as u32).sum(),
                                detail,
                            },
                            other => other,
                        })
                    })
                    .collect()
            })
            .collect()
    }

    /// Entries as series mod `p^s`.
    pub fn to_kz_vector(&self) -> Result<KzVector<TruncSeries<Zmod>>> {
        let res = self.residues()?;
        let ring = Zmod::new(self.p, self.s)?;
        let n = self.table.monos[0].len();
        let entries = (0..n)
            .map(|c| {
                let terms: Vec<(Monomial, u64)> = self
                    .table
                    .monos
                    .iter()
                    .zip(&res)
                    .map(|(m, v)| (Monomial::from_slice(m), v[c]))
                    .collect();
                TruncSeries::new(SparsePoly::from_terms(ring, VarSet::t(n), terms), self.cutoff)
                    .with_precision(self.s)
            })
            .collect();
        KzVector::new(entries)
    }

    /// Some degree has a coefficient of negative valuation.
    pub fn has_valuation_dip(&self) -> bool {
        self.min_valuation.iter().any(|&v| v < 0)
    }
}

/// The unique formal solution with `I(0) = v0`; works mod `p^{s + M}`.
pub fn solve_flat(v0: &[i64], base: &BasePoint, cutoff: u32, s: u32) -> Result<SeriesSolution> {
    let n = base.n();
    if v0.len() != n {
        return Err(Error::Shape(format!("initial vector of length {} for n = {n}", v0.len())));
    }
    if v0.iter().sum::<i64>() != 0 {
        return Err(Error::SumNotZero);
    }
    let p = base.p;
    let width = s + guard_digits(p, cutoff);
    let ctx = PAdicCtx::new(p, width)?;
    let m = Modulus::new(p, width)?;
    let table = MonomialTable::new(n, cutoff);
    // pair tables h_{ij}, i != j
    let mut pairs: Vec<Vec<Option<Vec<Vec<PAdic>>>>> = vec![vec![None; n]; n];
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let d = base.a[i] as i64 - base.a[j] as i64;
            let c = pair_coefficients(&m, d, cutoff as usize)?;
            pairs[i][j] = Some(
                c.iter()
                    .map(|row| row.iter().map(|&x| ctx.from_residue(x, width)).collect())
                    .collect(),
            );
        }
    }
    let half = ctx.div_int(&ctx.from_i64(1), 2);
    let mut coeffs: Vec<Vec<PAdic>> = Vec::with_capacity(table.len());
    coeffs.push(v0.iter().map(|&x| ctx.from_i64(x)).collect());
    let mut consistent = true;
    for k in 1..table.len() {
        let alpha = &table.monos[k];
        let d: u32 = alpha.iter().map(|&e| e as u32).sum();
        let mut total = vec![ctx.zero(); n];
        let mut per_index: Vec<(usize, Vec<PAdic>)> = Vec::new();
        for i in (0..n).filter(|&i| alpha[i] > 0) {
            let mut beta = alpha.clone();
            beta[i] -= 1;
            let mut acc = vec![ctx.zero(); n];
            for j in (0..n).filter(|&j| j != i) {
                let h = pairs[i][j].as_ref().expect("filled");
                let mut x = ctx.zero();
                let mut gamma = beta.clone();
                for r in 0..=beta[i] {
                    gamma[i] = beta[i] - r;
                    for q in 0..=beta[j] {
                        gamma[j] = beta[j] - q;
                        let idx = table.get(&gamma).expect("lower degree");
                        let diff = ctx.sub(&coeffs[idx][j], &coeffs[idx][i]);
                        if !diff.is_zero() {
                            x = ctx.add(&x, &ctx.mul(&h[r as usize][q as usize], &diff));
                        }
                    }
                    gamma[j] = beta[j];
                }
                acc[i] = ctx.add(&acc[i], &x);
                acc[j] = ctx.sub(&acc[j], &x);
            }
            let v: Vec<PAdic> = acc.iter().map(|x| ctx.mul(x, &half)).collect();
            for c in 0..n {
                total[c] = ctx.add(&total[c], &v[c]);
            }
            per_index.push((i, v));
        }
        let coeff: Vec<PAdic> = total.iter().map(|x| ctx.div_int(x, d as i64)).collect();
        for (i, v) in &per_index {
            let ai = ctx.from_i64(alpha[*i] as i64);
            for c in 0..n {
                if !ctx.sub(&ctx.mul(&ai, &coeff[c]), &v[c]).is_zero() {
                    consistent = false;
                }
            }
        }
        coeffs.push(coeff);
    }
    let mut min_valuation = vec![i32::MAX; cutoff as usize + 1];
    let mut certified = i32::MAX;
    for (mono, v) in table.monos.iter().zip(&coeffs) {
        let d = mono.iter().map(|&e| e as usize).sum::<usize>();
        for x in v {
            certified = certified.min(x.abs_prec());
            if !x.is_zero() {
                min_valuation[d] = min_valuation[d].min(x.valuation());
            }
        }
    }
    if certified < s as i32 {
        let worst = table
            .monos
            .iter()
            .zip(&coeffs)
            .find(|(_, v)| v.iter().any(|x| x.abs_prec() < s as i32))
            .map(|(m, _)| m.iter().map(|&e| e as u32).sum())
            .unwrap_or(0);
        return Err(Error::PrecisionExhausted {
            degree: worst,
            detail: format!("{width} working digits certify only p^{certified}"),
        });
    }
    Ok(SeriesSolution {
        p,
        cutoff,
        s,
        width,
        table,
        coeffs,
        min_valuation,
        certified,
        consistent,
    })
}

/// `e_k - e_n` as an integer vector.
fn basis_vector(n: usize, k: usize) -> Vec<i64> {
    let mut v = vec![0i64; n];
    v[k] = 1;
    v[n - 1] = -1;
    v
}

/// Initial vectors (coordinates `1..n-1`) whose solutions are integral through degree `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeReport {
    pub p: u64,
    pub s: u32,
    pub cutoff: u32,
    /// Largest power of `p` in a denominator of the basis solutions.
    pub denominator_exponent: u32,
    /// Integer generators of the lattice in `Z_p^{n-1}`.
    pub generators: Vec<Vec<u64>>,
    /// Howell basis of the image mod `p^s`.
    pub howell: Mat<u64>,
    /// Number of unit invariant factors of the image (McCoy rank).
    pub rank: usize,
    /// Invariant factor exponents of the image mod `p^s`.
    pub invariants: Vec<u32>,
    pub free: bool,
}

pub fn integral_lattice(base: &BasePoint, cutoff: u32, s: u32) -> Result<LatticeReport> {
    let n = base.n();
    let p = base.p;
    let sols = (0..n - 1)
        .into_par_iter()
        .map(|k| solve_flat(&basis_vector(n, k), base, cutoff, s))
        .collect::<Result<Vec<_>>>()?;
    let ctx = sols[0].ctx();
    let mut e = 0u32;
    for sol in &sols {
        for v in &sol.coeffs {
            for x in v {
                if x.abs_prec() < 0 {
                    return Err(Error::PrecisionExhausted {
                        degree: cutoff,
                        detail: "coefficient not known modulo the integers".into(),
                    });
                }
                if !x.is_zero() && x.valuation() < 0 {
                    e = e.max((-x.valuation()) as u32);
                }
            }
        }
    }
    let mut generators: Vec<Vec<u64>> = Vec::new();
    if e == 0 {
        generators.extend((0..n - 1).map(|k| (0..n - 1).map(|j| u64::from(j == k)).collect()));
    } else {
        let me = Modulus::new(p, e)?;
        let mut rows: Mat<u64> = Vec::new();
        for idx in 0..sols[0].coeffs.len() {
            for c in 0..n {
                let row = sols
                    .iter()
                    .map(|sol| ctx.scaled_residue(&sol.coeffs[idx][c], e as i32, e))
                    .collect::<Result<Vec<u64>>>()?;
                if row.iter().any(|&x| x != 0) {
                    rows.push(row);
                }
            }
        }
        rows.sort_unstable();
        rows.dedup();
        generators.extend(kernel(&me, &rows, n - 1));
        let pe = p.pow(e);
        generators.extend((0..n - 1).map(|k| (0..n - 1).map(|j| if j == k { pe } else { 0 }).collect()));
    }
    let ms = Modulus::new(p, s)?;
    let reduced: Mat<u64> = generators
        .iter()
        .map(|g| g.iter().map(|&x| ms.reduce_u64(x)).collect())
        .collect();
    let howell = howell_form(&ms, &reduced, n - 1);
    let sm = smith(&ms, &reduced, n - 1);
    let rank = rank_mod_p(&ms, &reduced);
    let free = sm.exponents.iter().all(|&d| d == 0);
    Ok(LatticeReport {
        p,
        s,
        cutoff,
        denominator_exponent: e,
        generators,
        howell,
        rank,
        invariants: sm.exponents,
        free,
    })
}

/// Full initial vector from coordinates `1..n-1`.
fn full_vector(coords: &[u64]) -> Vec<i64> {
    let mut v: Vec<i64> = coords.iter().map(|&x| x as i64).collect();
    v.push(-v.iter().sum::<i64>());
    v
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchReport {
    pub p: u64,
    pub s: u32,
    pub cutoff: u32,
    pub lattice_rank: usize,
    /// `b(0)`: row `i` expresses the `i`-th integral solution.
    pub b0: Mat<u64>,
    /// Non-constant terms of `b` as `(solution, monomial, coefficients)`.
    pub higher_terms: Vec<(usize, Vec<u16>, Vec<u64>)>,
    pub solvable: bool,
    pub quasi_constant: bool,
    pub det_unit: bool,
    pub pass: bool,
}

/// Series coefficients mod `p^s` of `Q^{s,j}(a + t)`, indexed like `table`.
pub fn q_taylor(base: &BasePoint, s: u32, table: &MonomialTable, cutoff: u32) -> Result<Vec<Vec<Vec<u64>>>> {
    let qs = q_solutions(base.p, s, base.g)?;
    let ring = qs.ring;
    let shift: Vec<u64> = base.a.iter().map(|&x| ring.modulus().reduce_u64(x)).collect();
    Ok(qs
        .vectors
        .iter()
        .map(|v| {
            let shifted: Vec<SparsePoly<Zmod>> = v
                .entries()
                .iter()
                .map(|e| e.translate(&shift, Some(cutoff)))
                .collect();
            table
                .monos
                .iter()
                .map(|m| shifted.iter().map(|e| e.coefficient(m)).collect())
                .collect()
        })
        .collect())
}

/// Writes integral solutions as `I^i = sum_j b^i_j Q^{s,j}(a + t) mod p^s`
/// degree by degree, for the lattice elements with unit initial pivots.
pub fn match_hypergeometric(base: &BasePoint, s: u32, cutoff: u32) -> Result<MatchReport> {
    let lat = integral_lattice(base, cutoff, s)?;
    let mut inits: Vec<Vec<u64>> = lat.generators.clone();
    let ms = Modulus::new(base.p, s)?;
    // genuine lattice elements, combined by unit pivots
    let sols = inits
        .par_iter()
        .map(|g| solve_flat(&full_vector(g), base, cutoff, s)?.residues())
        .collect::<Result<Vec<_>>>()?;
    let n = base.n();
    let mut rows: Mat<u64> = inits
        .iter_mut()
        .zip(&sols)
        .map(|(g, sol)| {
            let mut r: Vec<u64> = g.iter().map(|&x| ms.reduce_u64(x)).collect();
            r.extend(sol.iter().flatten().copied());
            r
        })
        .collect();
    let mut chosen: Vec<Vec<u64>> = Vec::new();
    let mut used = vec![false; rows.len()];
    loop {
        let pick = (0..rows.len())
            .filter(|&r| !used[r])
            .find_map(|r| (0..n - 1).find(|&c| ms.is_unit(rows[r][c])).map(|c| (r, c)));
        let Some((r, c)) = pick else { break };
        used[r] = true;
        let inv = ms.inv(rows[r][c]).expect("unit");
        let prow: Vec<u64> = rows[r].iter().map(|&x| ms.mul(x, inv)).collect();
        for (k, row) in rows.iter_mut().enumerate() {
            if k != r && row[c] != 0 {
                let f = row[c];
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x = ms.sub(*x, ms.mul(f, *y));
                }
            }
        }
        chosen.push(prow);
    }
    let table = MonomialTable::new(n, cutoff);
    let q = q_taylor(base, s, &table, cutoff)?;
    let g = base.g;
    let q0: Mat<u64> = q.iter().map(|v| v[0].clone()).collect();
    let mut solvable = true;
    let mut quasi_constant = true;
    let mut b0 = Vec::new();
    let mut higher_terms = Vec::new();
    for (idx, row) in chosen.iter().enumerate() {
        let series: Vec<&[u64]> = row[n - 1..].chunks(n).collect();
        // nonzero b_beta so far
        let mut b_terms: Vec<(usize, Vec<u64>)> = Vec::new();
        for (k, alpha) in table.monos.iter().enumerate() {
            let mut rhs: Vec<u64> = series[k].to_vec();
            for (bk, coeffs) in &b_terms {
                let beta = &table.monos[*bk];
                if beta.iter().zip(alpha).all(|(x, y)| x <= y) {
                    let diff: Vec<u16> = alpha.iter().zip(beta).map(|(x, y)| x - y).collect();
                    let di = table.get(&diff).expect("in table");
                    for (j, &c) in coeffs.iter().enumerate() {
                        for comp in 0..n {
                            rhs[comp] = ms.sub(rhs[comp], ms.mul(c, q[j][di][comp]));
                        }
                    }
                }
            }
            let Some(b) = solve_in_span(&ms, &q0, &rhs) else {
                solvable = false;
                break;
            };
            if k == 0 {
                b0.push(b.clone());
            }
            if b.iter().any(|&x| x != 0) {
                if k > 0 {
                    if alpha.iter().any(|&e| b.iter().any(|&x| ms.mul(ms.reduce_u64(e as u64), x) != 0)) {
                        quasi_constant = false;
                    }
                    higher_terms.push((idx, alpha.clone(), b.clone()));
                }
                b_terms.push((k, b));
            }
        }
    }
    let mp = Modulus::new(base.p, 1)?;
    let det_unit = b0.len() == g && rank_mod_p(&mp, &b0) == g;
    let pass = solvable && quasi_constant && det_unit;
    Ok(MatchReport {
        p: base.p,
        s,
        cutoff,
        lattice_rank: lat.rank,
        b0,
        higher_terms,
        solvable,
        quasi_constant,
        det_unit,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactring::Ring;

    fn base(p: u64, g: usize, a: &[u64]) -> BasePoint {
        BasePoint::new(p, g, a.to_vec()).unwrap()
    }

    #[test]
    fn monomial_table_counts() {
        let t = MonomialTable::new(3, 4);
        assert_eq!(t.len(), 35);
        assert!(t.get(&[1, 2, 1]).is_some());
    }

    #[test]
    fn hamiltonian_expansion() {
        let b = base(5, 1, &[0, 1, 2]);
        let hs: Vec<_> = (0..3).map(|i| expand_hamiltonian(&b, i, 4, 2).unwrap()).collect();
        let z = Zmod::new(5, 2).unwrap();
        // entry (2, 1) of H_1 is 1/(-1 + t_1 - t_2); constant term -1
        assert_eq!(hs[0][1][0].poly().constant_term(), z.from_i64(-1));
        assert_eq!(hs[0][1][0].coefficient(&[1, 0, 0]).unwrap(), z.from_i64(-1));
        for r in 0..3 {
            for c in 0..3 {
                let s = hs[0][r][c].add(&hs[1][r][c]).add(&hs[2][r][c]);
                assert!(s.poly().is_zero());
            }
        }
    }

    #[test]
    fn zero_degree_and_consistency() {
        let b = base(5, 1, &[0, 1, 2]);
        let sol = solve_flat(&[1, 0, -1], &b, 0, 1).unwrap();
        assert_eq!(sol.residues().unwrap(), vec![vec![1, 0, 4]]);
        let sol = solve_flat(&[0, 1, -1], &b, 8, 2).unwrap();
        assert!(sol.consistent);
        assert!(sol.has_valuation_dip());
        assert_eq!(sol.min_valuation[4], 0);
        assert_eq!(sol.min_valuation[5], -1);
    }

    #[test]
    fn hypergeometric_initial_value_agrees_below_p() {
        let b = base(5, 1, &[0, 1, 2]);
        let table = MonomialTable::new(3, 4);
        let q = q_taylor(&b, 1, &table, 4).unwrap();
        let v0: Vec<i64> = q[0][0].iter().map(|&x| x as i64).collect();
        let mut v0 = v0;
        let sum: i64 = v0.iter().sum();
        v0[2] -= sum;
        let sol = solve_flat(&v0, &b, 4, 1).unwrap().residues().unwrap();
        assert_eq!(sol, q[0]);
    }

    #[test]
    fn lattice_small_case() {
        let b = base(5, 1, &[0, 1, 2]);
        let lat = integral_lattice(&b, 6, 1).unwrap();
        assert_eq!(lat.rank, 1);
        assert!(lat.free);
        let m = match_hypergeometric(&b, 1, 6).unwrap();
        assert!(m.pass, "{m:?}");
    }
}
