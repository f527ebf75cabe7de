//! Hybrid analog/digital beamforming for frequency-selective massive MIMO.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: complex matrices, tap sequences and their spectra, log-det
//!   and left pseudo-inverse.
//! - [`channel`]: rich-scattering Rayleigh and clustered sparse channel
//!   draws with an exponential power-delay profile.
//! - [`beamforming`]: matched filter, constant-modulus 1-tap / L-tap RF
//!   combiners, the two-network-per-tap phase bank and per-subcarrier ZF.
//! - [`metrics`]: capacity, hybrid rates, PDP based SINR and RMS delay spread.
//! - [`closed_forms`]: asymptotic large-array predictions.
//! - [`experiments`]: seeded Monte-Carlo harness and figure presets.
//!
//! Realization loops run on rayon when the `parallel` feature is enabled
//! (the default). Results never depend on the thread count.

pub mod beamforming;
pub mod channel;
pub mod closed_forms;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod metrics;
pub mod numerics;
pub mod rng;

pub use error::{Error, Result};
pub use num_complex::Complex64;
