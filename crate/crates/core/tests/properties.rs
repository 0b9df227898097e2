use proptest::prelude::*;

use kzcrystal::exactring::{
    d_dz, mod_inv, poly_pow, Cutoff, Modulus, Monomial, Residue, Ring, SparsePoly, VarSet, Zmod,
};

fn modulus() -> impl Strategy<Value = Modulus> {
    (prop::sample::select(vec![3u64, 5, 7, 11, 13]), 1u32..4).prop_map(|(p, s)| Modulus::new(p, s).unwrap())
}

fn poly(ring: Zmod, n: usize) -> impl Strategy<Value = SparsePoly<Zmod>> {
    let q = ring.modulus().value();
    prop::collection::vec((prop::collection::vec(0u16..3, n), 0..q), 0..6).prop_map(move |terms| {
        SparsePoly::from_terms(
            ring,
            VarSet::z(n),
            terms.into_iter().map(|(e, c)| (Monomial::from_slice(&e), c)),
        )
    })
}

proptest! {
    #[test]
    fn residue_ring_axioms(m in modulus(), a in any::<i32>(), b in any::<i32>(), c in any::<i32>()) {
        let (a, b, c) = (Residue::new(a as i64, m), Residue::new(b as i64, m), Residue::new(c as i64, m));
        prop_assert_eq!((a + b) + c, a + (b + c));
        prop_assert_eq!(a * (b + c), a * b + a * c);
        prop_assert_eq!(a * b, b * a);
        prop_assert_eq!((a - a).value(), 0);
        prop_assert_eq!((a + (-a)).value(), 0);
    }

    #[test]
    fn inverses_exist_exactly_for_units(m in modulus(), a in any::<u32>()) {
        let a = Residue::new(a as i64, m);
        match mod_inv(a) {
            Ok(inv) => prop_assert_eq!((a * inv).value(), 1),
            Err(_) => prop_assert_eq!(a.value() % m.p(), 0),
        }
    }

    #[test]
    fn pow_matches_repeated_product(f in poly(Zmod::new(5, 2).unwrap(), 3), e in 0u64..6) {
        let mut naive = SparsePoly::one(*f.ring(), f.vars().clone());
        for _ in 0..e {
            naive = naive.mul(&f);
        }
        prop_assert!(poly_pow(&f, e, None).equals(&naive));
    }

    #[test]
    fn truncated_pow_matches_truncated_product(f in poly(Zmod::new(7, 1).unwrap(), 2), e in 1u64..6) {
        let cut = Some(Cutoff { var: 0, max: 4 });
        let naive = poly_pow(&f, e, None).truncate(cut);
        prop_assert!(poly_pow(&f, e, cut).equals(&naive));
    }

    #[test]
    fn derivative_obeys_leibniz(
        f in poly(Zmod::new(3, 3).unwrap(), 3),
        g in poly(Zmod::new(3, 3).unwrap(), 3),
        i in 1usize..4,
    ) {
        let lhs = d_dz(&f.mul(&g), i).unwrap();
        let rhs = d_dz(&f, i).unwrap().mul(&g).add(&f.mul(&d_dz(&g, i).unwrap()));
        prop_assert!(lhs.equals(&rhs));
    }

    #[test]
    fn reduction_is_a_ring_map(f in poly(Zmod::new(5, 3).unwrap(), 2), g in poly(Zmod::new(5, 3).unwrap(), 2)) {
        let low = Zmod::new(5, 1).unwrap();
        let red = |h: &SparsePoly<Zmod>| h.map_ring(low, |&c| c % 5);
        prop_assert!(red(&f.mul(&g)).equals(&red(&f).mul(&red(&g))));
        prop_assert!(red(&f.add(&g)).equals(&red(&f).add(&red(&g))));
    }

    #[test]
    fn evaluation_is_multiplicative(
        f in poly(Zmod::new(11, 2).unwrap(), 3),
        g in poly(Zmod::new(11, 2).unwrap(), 3),
        pt in prop::collection::vec(0u64..121, 3),
    ) {
        let r = *f.ring();
        prop_assert_eq!(f.mul(&g).eval(&pt), r.mul(&f.eval(&pt), &g.eval(&pt)));
    }
}
