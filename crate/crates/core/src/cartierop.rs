//! The Cartier operator on truncated closed 1-forms over `F_p[[t_1..t_n]]`.

use crate::error::{Error, Result};
use crate::exactring::{Monomial, SparsePoly, TruncSeries, VarSet, Zmod};

/// `sum_i f_i dt_i`, each component known through total degree `cutoff`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncOneForm {
    comps: Vec<TruncSeries<Zmod>>,
    cutoff: u32,
}

impl TruncOneForm {
    pub fn new(comps: Vec<TruncSeries<Zmod>>) -> Result<Self> {
        let n = comps.len();
        if n == 0 || comps.iter().any(|c| c.nvars() != n) {
            return Err(Error::Shape(format!("{n} components need {n} variables each")));
        }
        let cutoff = comps.iter().map(|c| c.cutoff()).min().unwrap_or(0);
        let comps = comps.into_iter().map(|c| c.truncate(cutoff)).collect();
        Ok(TruncOneForm { comps, cutoff })
    }

    pub fn ring(&self) -> Zmod {
        *self.comps[0].ring()
    }

    pub fn nvars(&self) -> usize {
        self.comps.len()
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn components(&self) -> &[TruncSeries<Zmod>] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.poly().is_zero())
    }

    /// `d_i f_j = d_j f_i` through degree `cutoff - 1`.
    pub fn is_closed(&self) -> bool {
        let n = self.nvars();
        (0..n).all(|i| {
            (0..i).all(|j| {
                self.comps[j]
                    .derivative(i)
                    .agrees_with(&self.comps[i].derivative(j))
            })
        })
    }

    pub fn add(&self, o: &Self) -> Self {
        let comps = self.comps.iter().zip(&o.comps).map(|(a, b)| a.add(b)).collect();
        TruncOneForm::new(comps).expect("same shape")
    }

    /// `u * eta` for a series `u`.
    pub fn mul_series(&self, u: &TruncSeries<Zmod>) -> Self {
        TruncOneForm::new(self.comps.iter().map(|c| c.mul(u)).collect()).expect("same shape")
    }

    /// Reduction of the coefficients to a smaller modulus of the same prime.
    pub fn reduce_to(&self, target: Zmod) -> Self {
        let q = target.modulus().value();
        let comps = self
            .comps
            .iter()
            .map(|c| TruncSeries::new(c.poly().map_ring(target, |v| v % q), c.cutoff()))
            .collect();
        TruncOneForm::new(comps).expect("same shape")
    }

    /// Agreement through the smaller of the two cutoffs.
    pub fn agrees_with(&self, o: &Self) -> bool {
        self.comps.iter().zip(&o.comps).all(|(a, b)| a.agrees_with(b))
    }
}

/// `dh`, known through degree `cutoff(h) - 1`.
pub fn differential(h: &TruncSeries<Zmod>) -> TruncOneForm {
    TruncOneForm::new((0..h.nvars()).map(|i| h.derivative(i)).collect()).expect("square shape")
}

/// Degree through which `C(eta)` is determined by `eta` known through `cutoff`.
pub fn certified_degree(p: u64, cutoff: u32) -> Option<u32> {
    let c = cutoff as u64 + 1;
    (c >= p).then(|| ((c - p) / p) as u32)
}

/// `C(sum f_i dt_i)`: the `dt_i` coefficient at `t^a` is the coefficient of
/// `t^{p a + (p-1) e_i}` in `f_i`. Coefficients are first reduced mod `p`.
pub fn cartier(eta: &TruncOneForm) -> Result<TruncOneForm> {
    let p = eta.ring().modulus().p();
    let fp = Zmod::new(p, 1)?;
    let eta = eta.reduce_to(fp);
    let out_cut = certified_degree(p, eta.cutoff).ok_or_else(|| {
        Error::CutoffTooSmall(format!("cutoff {} < p - 1 = {}", eta.cutoff, p - 1))
    })?;
    if !eta.is_closed() {
        return Err(Error::NotClosed(format!("through degree {}", eta.cutoff.saturating_sub(1))));
    }
    let n = eta.nvars();
    let comps = eta
        .comps
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let terms = f.terms().iter().filter_map(|(m, c)| {
                let e = m.exps();
                let ok = (0..n).all(|k| {
                    let shifted = e[k] as u64 + u64::from(k == i);
                    shifted % p == 0
                });
                ok.then(|| {
                    let a: Vec<u16> = (0..n)
                        .map(|k| ((e[k] as u64 + u64::from(k == i)) / p) as u16 - u16::from(k == i))
                        .collect();
                    (Monomial::from_slice(&a), *c)
                })
            });
            let poly = SparsePoly::from_terms(fp, VarSet::t(n), terms.collect::<Vec<_>>());
            TruncSeries::new(poly, out_cut)
        })
        .collect();
    TruncOneForm::new(comps)
}

/// `C^k(eta)`; fails once the certified degree runs out.
pub fn cartier_iterate(eta: &TruncOneForm, k: usize) -> Result<TruncOneForm> {
    let mut cur = eta.clone();
    for _ in 0..k {
        cur = cartier(&cur)?;
    }
    Ok(cur)
}

/// `dq / q`.
pub fn dlog(q: &TruncSeries<Zmod>) -> Result<TruncOneForm> {
    let inv = q.inverse()?;
    TruncOneForm::new((0..q.nvars()).map(|i| q.derivative(i).mul(&inv)).collect())
}

/// Truncated power by repeated squaring.
pub fn series_pow(h: &TruncSeries<Zmod>, mut e: u64) -> TruncSeries<Zmod> {
    let r = *h.ring();
    let mut acc = TruncSeries::new(SparsePoly::one(r, h.poly().vars().clone()), h.cutoff());
    let mut base = h.clone();
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

/// `eta = dg / p^s mod p` for `g` over `Z/p^{s+1}`.
pub fn eta_from_witness(g: &TruncSeries<Zmod>, s: u32) -> Result<TruncOneForm> {
    let ring = *g.ring();
    let m = ring.modulus();
    if m.s() != s + 1 {
        return Err(Error::InvalidModulus(format!("witness must live mod p^{}", s + 1)));
    }
    let p = m.p();
    let fp = Zmod::new(p, 1)?;
    let dg = differential(g);
    let mut comps = Vec::with_capacity(dg.nvars());
    for c in dg.components() {
        if let Some((_, bad)) = c.terms().iter().find(|(_, v)| m.valuation(*v) < s) {
            return Err(Error::BadWitness(format!("coefficient {bad} of dg is not divisible by p^{s}")));
        }
        comps.push(TruncSeries::new(
            c.poly().map_ring(fp, |&v| m.div_p_power(v, s) % p),
            c.cutoff(),
        ));
    }
    TruncOneForm::new(comps)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessReport {
    pub p: u64,
    pub s: u32,
    pub cutoff: u32,
    /// Certified degree after each application of `C`.
    pub certified: Vec<u32>,
    pub vanishes: bool,
    pub pass: bool,
}

/// `C^{s+1}(eta) = 0` for `eta` with `dg = p^s eta`; `eta` is rebuilt from `g`
/// and compared with the supplied form when one is given.
pub fn witness_check(g: &TruncSeries<Zmod>, s: u32, eta: Option<&TruncOneForm>) -> Result<WitnessReport> {
    let built = eta_from_witness(g, s)?;
    if let Some(e) = eta {
        let fp = built.ring();
        if !built.agrees_with(&e.reduce_to(fp)) {
            return Err(Error::BadWitness("dg / p^s differs from the given form".into()));
        }
    }
    let p = built.ring().modulus().p();
    let mut certified = Vec::new();
    let mut cur = built.clone();
    for _ in 0..=s {
        cur = cartier(&cur)?;
        certified.push(cur.cutoff());
    }
    let vanishes = cur.is_zero();
    Ok(WitnessReport {
        p,
        s,
        cutoff: built.cutoff(),
        certified,
        vanishes,
        pass: vanishes,
    })
}

/// Smallest input cutoff leaving `final_degree` certified after `k` applications.
pub fn cutoff_for(p: u64, k: usize, final_degree: u32) -> u32 {
    let mut d = final_degree as u64;
    for _ in 0..k {
        d = p * d + p - 1;
    }
    d as u32
}

fn random_poly(ring: Zmod, n: usize, max_deg: u32, rng: &mut impl rand::Rng) -> SparsePoly<Zmod> {
    let q = ring.modulus().value();
    let mut terms = Vec::new();
    let mut exps = vec![0u16; n];
    loop {
        let d: u32 = exps.iter().map(|&e| e as u32).sum();
        if d <= max_deg && d > 0 {
            terms.push((Monomial::from_slice(&exps), rng.gen_range(0..q)));
        }
        // odometer over [0, max_deg]^n
        let mut k = 0;
        while k < n {
            exps[k] += 1;
            if exps[k] as u32 <= max_deg {
                break;
            }
            exps[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    SparsePoly::from_terms(ring, VarSet::t(n), terms)
}

/// `g = sum_{k=0}^{s} p^k h_k^{p^{s-k}}` with random `h_k` of degree <= 2, mod `p^{s+1}`;
/// then `dg` is divisible by `p^s`.
pub fn random_witness(p: u64, s: u32, n: usize, cutoff: u32, rng: &mut impl rand::Rng) -> Result<TruncSeries<Zmod>> {
    let ring = Zmod::new(p, s + 1)?;
    let m = ring.modulus();
    let mut g = TruncSeries::zero(ring, n, cutoff);
    for k in 0..=s {
        let h = TruncSeries::new(random_poly(ring, n, 2, rng), cutoff);
        let e = p.pow(s - k);
        let term = series_pow(&h, e).scale(&m.pow(p, k as u64));
        g = g.add(&term);
    }
    Ok(g)
}

/// A random series over `F_p` with a unit constant term.
pub fn random_unit_series(p: u64, n: usize, cutoff: u32, rng: &mut impl rand::Rng) -> Result<TruncSeries<Zmod>> {
    let fp = Zmod::new(p, 1)?;
    let c0 = rng.gen_range(1..p);
    let mut poly = random_poly(fp, n, cutoff, rng);
    poly = poly.add(&SparsePoly::constant(fp, VarSet::t(n), c0));
    Ok(TruncSeries::new(poly, cutoff))
}
