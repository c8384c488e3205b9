//! Channel-coded over-the-air computation (AirComp).
//!
//! All users of a multiple-access channel share one tall encoding matrix
//! `Φ` (`L̃ × L`), pre-invert their own fading coefficient, and transmit
//! simultaneously. The receiver sees `√P · Φ · Σ w_k + n` and recovers the
//! sum with the pseudo-inverse of `Φ`. This crate builds and validates such
//! matrices, simulates the full chain, and evaluates the closed-form MSE
//! statistics and rate regions of the optimal (orthonormal-column) scheme.
//!
//! Module map:
//!
//! * [`numerics`]: complex linear algebra, special functions, KS statistics, seeded RNG streams.
//! * [`coding`]: encoding-matrix construction, validation, and Φ-only MSE expressions.
//! * [`channel`]: sources, Rician fading, channel-inversion precoding, superposition, decoding.
//! * [`analysis`]: Gamma law of the optimal MSE, rate regions, Chernoff bound.
//! * [`experiments`]: Monte Carlo harness, sweeps, statistical certification.
//! * [`cli`]: command-line front end.

pub mod analysis;
pub mod channel;
pub mod cli;
pub mod coding;
pub mod error;
pub mod experiments;
pub mod numerics;

pub use error::{Error, Result};
pub use num_complex::Complex64;
