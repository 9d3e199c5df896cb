//! Casimir interaction between two perfectly conducting spheres, one inside
//! the other or side by side.
//!
//! The exact energy comes from the round-trip log-determinant of the
//! scattering operators, integrated over imaginary wavenumber. Around it sit
//! the short-distance (proximity force) and far-distance (Casimir-Polder)
//! asymptotics and the curve fits used to extract correction coefficients.
//!
//! Units: hbar = c = 1. Energies come out in units of hbar*c per length unit
//! of the inputs; the solver itself works with the cavity radius set to one.

pub mod analysis;
pub mod cp;
pub mod energy;
mod error;
pub mod linalg;
pub mod pfa;
pub mod quadrature;
pub mod scattering;
pub mod specfun;
pub mod translation;

pub use error::{CasimirError, Result};
