//! Exact coefficient arithmetic: residue rings, sparse polynomials,
//! rational functions with controlled denominators, truncated series and
//! linear algebra over `Z/p^s`.

pub mod binomial;
pub mod diag;
pub mod json;
pub mod linalg;
pub mod modulus;
pub mod padic;
pub mod poly;
pub mod ring;
pub mod series;
pub mod upoly;

pub use diag::{DiagRational, Factor};
pub use modulus::{mod_inv, Modulus, Residue};
pub use poly::{coeff_of, d_dz, poly_pow, Cutoff, Monomial, SparsePoly, VarSet};
pub use ring::{Dual, Integers, Rationals, Ring, Zmod};
pub use series::TruncSeries;
pub use upoly::UniPoly;
