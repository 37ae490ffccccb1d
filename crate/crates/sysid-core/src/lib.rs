//! Core algorithms for small-signal identification of power-system components
//! from ambient PMU-style measurements.
//!
//! The crate covers the full inference chain in the frequency domain:
//!
//! * [`model`]: small-signal admittance models (classical generator, induction
//!   motor) mapping two input channels to two output channels, with their
//!   steady-state solvers.
//! * [`spectral`]: DFT/IDFT on a half-spectrum grid and one-sided PSDs.
//! * [`simulate`]: ambient input generation, linear output synthesis, noise
//!   injection, and nonlinear time-domain reference simulators.
//! * [`inference`]: whitened frequency-domain residuals, per-bin noise
//!   covariance, and the MAP objective.
//! * [`optimize`]: cross-entropy search and a projected quasi-Newton baseline.
//!
//! Everything here is `no_std` + `alloc`; IO, file formats and the CLI live in
//! the companion crate. All randomness flows through explicitly seeded
//! generators from [`rng`], so every result is reproducible bit for bit.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod inference;
pub mod model;
pub mod optimize;
pub mod params;
pub mod rng;
pub mod series;
pub mod simulate;
pub mod spectral;

pub use num_complex::Complex64;
