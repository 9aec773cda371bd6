//! Phase-flip quantities of a dynamically biased quantum parametric
//! oscillator in the rotating frame: classical complex-time orbit data,
//! Bohr–Sommerfeld levels and dissipative transition rates, quasistationary
//! distributions and quantum-activation energies, plus an
//! exact-diagonalization reference.

pub mod error;
pub mod kinetics;
pub mod landscape;
pub mod markov;
pub mod oracle;
pub mod orbits;
pub mod params;
pub mod semiclassics;

mod curve;
mod ode;
mod poly;
mod quad;

pub use error::{FliplineError, Result};
pub use num_complex::Complex64;
pub use params::{ModelParams, Role, Tolerances, WellId};
