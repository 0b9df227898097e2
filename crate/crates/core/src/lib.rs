//! Hyperelliptic KZ equations over `Z/p^s`: p^s-hypergeometric solutions,
//! the de Rham side, generalized Cartier maps, p-curvature and local flat
//! sections.

pub mod error;
pub mod exactring;
pub mod kzsystem;
pub mod hypersol;
pub mod derham;
pub mod crystalmap;
pub mod cartierop;
pub mod pcurvature;
pub mod localflat;

pub use error::{Error, Result};
