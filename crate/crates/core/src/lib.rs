//! Lackadaisical alternating quantum walks (LAQW) and controlled alternating
//! quantum walks (CAQW) on two-dimensional periodic lattices.
//!
//! The crate is organised bottom-up:
//!
//! * [`walk`] exact statevector evolution plus dense operator oracles,
//! * [`circuit`] gate-level constructions, decomposition, routing and depth,
//! * [`sampling`] finite-shot counts with a seeded generator and a noise channel,
//! * [`keygen`] rounding, prime-modulus byte mapping, min-entropy and extraction,
//! * [`randtests`] six SP 800-22 statistical tests,
//! * [`analysis`] sensitivity, reproducibility and noise experiments.

pub mod analysis;
pub mod bits;
pub mod circuit;
mod error;
pub mod keygen;
pub mod randtests;
pub mod sampling;
pub mod special;
pub mod walk;

pub use error::{Error, Result};
