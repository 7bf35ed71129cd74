//! Hermite reproducing kernels, Toeplitz quantization and its semiclassical
//! limit.
//!
//! The modules build on each other roughly in declaration order: Hermite
//! functions and Gauss–Hermite rules, symbol algebra, Mehler kernels,
//! Toeplitz matrices and grid operators, asymptotic expansions, and the
//! Fock-space/Weyl correspondence.

pub mod asymptotics;
pub mod error;
pub mod fock;
pub mod hermite;
pub mod quadrature;
pub mod kernels;
pub mod operators;
pub mod symbols;

pub use error::{Error, Result};
pub use symbols::{Symbol1D, Symbol2D};
