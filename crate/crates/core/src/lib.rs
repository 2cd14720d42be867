//! Semigroup kernels and traces of the isotropic harmonic oscillator on the
//! whole space and in a Dirichlet cube, with tools to measure how fast the
//! finite-box trace approaches the whole-space one.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod fit;
pub mod kernels;
pub mod oracle;
pub mod quad;
pub mod spectrum;
pub mod statmech;
pub mod traces;
pub mod tridiag;

pub use error::{Error, Result};
