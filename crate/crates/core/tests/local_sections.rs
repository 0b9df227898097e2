use kzcrystal::exactring::linalg::rank_mod_p;
use kzcrystal::exactring::Modulus;
use kzcrystal::localflat::{guard_digits, integral_lattice, match_hypergeometric, solve_flat, BasePoint};
use kzcrystal::Error;

#[test]
fn series_solve_the_system_in_every_direction() {
    let base = BasePoint::new(7, 2, vec![0, 1, 2, 3, 4]).unwrap();
    let sol = solve_flat(&[1, 0, 0, 0, -1], &base, 9, 1).unwrap();
    assert!(sol.consistent);
    assert_eq!(sol.width, 1 + guard_digits(7, 9));
}

#[test]
fn precision_runs_out_with_too_many_divisions() {
    // four digits of headroom cannot absorb the losses from 125!
    let base = BasePoint::new(5, 1, vec![0, 1, 2]).unwrap();
    let err = solve_flat(&[0, 1, -1], &base, 30, 1);
    assert!(matches!(err, Err(Error::PrecisionExhausted { .. })), "{err:?}");
}

#[test]
fn non_ordinary_base_point_is_rejected() {
    assert!(BasePoint::new(5, 1, vec![0, 1, 6]).is_err());
    assert!(BasePoint::new(5, 2, vec![0, 1, 2, 3, 4]).is_err());
}

#[test]
fn lattice_elements_have_integral_series() {
    let base = BasePoint::new(5, 1, vec![0, 1, 2]).unwrap();
    let lat = integral_lattice(&base, 10, 2).unwrap();
    assert_eq!(lat.rank, 1);
    for g in &lat.generators {
        let mut v: Vec<i64> = g.iter().map(|&x| x as i64).collect();
        v.push(-v.iter().sum::<i64>());
        let sol = solve_flat(&v, &base, 10, 2).unwrap();
        assert!(!sol.has_valuation_dip(), "{v:?}");
    }
}

#[test]
fn quasi_constants_of_an_ordinary_point() {
    let base = BasePoint::new(7, 2, vec![0, 1, 3, 5, 6]).unwrap();
    let m = match_hypergeometric(&base, 1, 10).unwrap();
    assert!(m.pass);
    assert_eq!(m.b0.len(), 2);
    let mp = Modulus::new(7, 1).unwrap();
    assert_eq!(rank_mod_p(&mp, &m.b0), 2);
}
