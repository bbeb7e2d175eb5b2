//! Bose-Hubbard dimer scattering off a localized lattice potential and
//! decay of a trapped pair through Gamov resonances.

pub mod cli;
pub mod cplx;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod resonances;
pub mod scattering;
pub mod timedomain;

pub use error::{Error, Result};
