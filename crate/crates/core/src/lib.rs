//! Laboratory for the semi-source-independent quantum-walk random number
//! generator.
//!
//! The crate is organised bottom-up:
//!
//! * [`walk`] simulates the discrete-time Hadamard walk on a cycle of `P`
//!   positions, its position statistics and the maximal positional
//!   probability `γ`.
//! * [`entropy`] and [`sampling`] hold the classical statistics: `d`-ary
//!   entropies, relative Hamming weights, the sampling deviation `δ` and the
//!   classical sampling error bound.
//! * [`binomial`] computes `log₂ C(N, m)` for `N` far beyond integer range.
//! * [`rate`] evaluates the finite-key output length `ℓ` and rate curves.
//! * [`protocol`] runs the protocol end to end against a simulated source and
//!   extracts key bits with a Toeplitz hash.
//! * [`selftest`] bundles a fast invariant suite used by the CLI.

pub mod binomial;
pub mod entropy;
mod error;
pub mod protocol;
pub mod rate;
pub mod rng;
pub mod sampling;
pub mod selftest;
pub mod walk;

pub use error::{Error, Result};

/// Version string echoed into every output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
