//! Exact piecewise-linear path algebra on the unit interval, seeded Brownian
//! path synthesis, occupation measures, pathwise stochastic integration on
//! dyadic grids, and three cross-validated local-time estimators (occupation
//! density, Tanaka, dyadic sign-change sum).
//!
//! All grid anchoring is dyadic and bit-exact; all randomness is a pure
//! function of an explicit 64-bit seed, so every computation in this crate is
//! reproducible to the byte.

pub mod error;
pub mod experiments;
pub mod integration;
pub mod io;
pub mod local_time;
pub mod occupation;
pub mod path_model;
pub mod sampler;

pub use error::{Error, Result};

/// Hard cap on dyadic grid levels: 2^26 grid points keep memory desk-scale.
/// Cap violations are reported errors, never clamps.
pub const MAX_LEVEL: u32 = 26;
