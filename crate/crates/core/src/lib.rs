//! Stochastic Galerkin discontinuous Galerkin solver for scalar conservation
//! laws with random data, with space-time-stochastic reconstructions and
//! residual-based a posteriori error estimates.

pub mod basis;
pub mod dg;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod quadrature;
pub mod reconstruction;
pub mod sg;

pub use error::{Error, Result};
pub mod time;
