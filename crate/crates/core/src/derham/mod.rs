//! De Rham cohomology of `y^2 = prod (x - z_k)`: reduction to the basis
//! `[w_j]`, the Gauss-Manin connection and the cup-product pairing.

pub mod curve;
pub mod gm;
pub mod pairing;

pub use curve::{reduce_to_basis, CohClass, CurveData, FormRep};
pub use gm::{connection_matrix, duality_holds, gm_matrix, measure_sign, SIGMA};
pub use pairing::{lagrangian_check, poincare_pairing, LagrangianReport};
