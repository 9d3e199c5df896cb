//! Special functions: modified spherical Bessel tables and Wigner 3j symbols.

mod bessel;
mod wigner;

pub use bessel::{scaled_bessel, ScaledBesselTable, MAX_ORDER};
pub use wigner::{lambda_pm, three_j, three_j_family, wigner_3j, ThreeJFamily, ThreeJKey};
