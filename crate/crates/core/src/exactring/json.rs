//! Canonical serialization of polynomials:
//! `{"vars":[...],"terms":[{"exp":[...],"c":"<decimal>"}],"mod":"p^s"}`.
//!
//! Terms appear in increasing graded-lex order and coefficients are the
//! canonical representatives, so equal polynomials serialize identically.

use serde_json::{json, Value};

use super::poly::{Monomial, SparsePoly, VarSet};
use super::ring::{Ring, Zmod};
use crate::error::{Error, Result};

pub fn poly_to_json<R: Ring>(p: &SparsePoly<R>) -> Value {
    let terms: Vec<Value> = p
        .terms()
        .iter()
        .map(|(m, c)| json!({"exp": m.exps(), "c": p.ring().render(c)}))
        .collect();
    json!({
        "vars": p.vars().names(),
        "terms": terms,
        "mod": p.ring().label(),
    })
}

pub fn poly_from_json(v: &Value) -> Result<SparsePoly<Zmod>> {
    let bad = |what: &str| Error::Parse(format!("polynomial json: {what}"));
    let vars: Vec<String> = v["vars"]
        .as_array()
        .ok_or_else(|| bad("vars"))?
        .iter()
        .map(|s| s.as_str().map(str::to_string).ok_or_else(|| bad("var name")))
        .collect::<Result<_>>()?;
    let label = v["mod"].as_str().ok_or_else(|| bad("mod"))?;
    let (p, s) = label.split_once('^').ok_or_else(|| bad("mod"))?;
    let ring = Zmod::new(
        p.parse().map_err(|_| bad("mod prime"))?,
        s.parse().map_err(|_| bad("mod exponent"))?,
    )?;
    let n = vars.len();
    let mut terms = Vec::new();
    for t in v["terms"].as_array().ok_or_else(|| bad("terms"))? {
        let exp: Vec<u16> = t["exp"]
            .as_array()
            .ok_or_else(|| bad("exp"))?
            .iter()
            .map(|e| e.as_u64().map(|e| e as u16).ok_or_else(|| bad("exponent")))
            .collect::<Result<_>>()?;
        if exp.len() != n {
            return Err(bad("exponent length"));
        }
        let c: i64 = t["c"]
            .as_str()
            .ok_or_else(|| bad("coefficient"))?
            .parse()
            .map_err(|_| bad("coefficient"))?;
        terms.push((Monomial::from_slice(&exp), ring.from_i64(c)));
    }
    Ok(SparsePoly::from_terms(ring, VarSet::new(vars), terms))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let z = Zmod::new(7, 2).unwrap();
        let vars = VarSet::zx(2);
        let p = SparsePoly::var(z, vars.clone(), 0)
            .mul(&SparsePoly::var(z, vars.clone(), 2))
            .sub(&SparsePoly::constant(z, vars, 3));
        let v = poly_to_json(&p);
        assert_eq!(v["mod"], "7^2");
        assert_eq!(v["terms"][0]["c"], "46");
        let q = poly_from_json(&v).unwrap();
        assert!(q.equals(&p));
        assert_eq!(serde_json::to_string(&poly_to_json(&q)).unwrap(), serde_json::to_string(&v).unwrap());
    }
}
