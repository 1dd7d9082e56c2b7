//! Simulation toolkit for cavity-confined Bragg-scattering four-wave-mixing
//! (BS-FWM) frequency converters.
//!
//! The crate is organized around four subsystems:
//!
//! * [`cmt`] — the four-mode coupled-amplitude model of a dual-pump microring
//!   converter: steady state, output coupling, conversion efficiency,
//!   cooperativity regimes, optimal detunings, eigenvalue splitting, and
//!   time-domain integration.
//! * [`dispersion`] — Taylor-expanded propagation constants, group-velocity
//!   dispersion, BS-FWM phase mismatch, and spontaneous-FWM phase-matching
//!   classification.
//! * [`noise`] — parametric noise channels (fluorescence, SFWM, Raman), their
//!   power/polarization scaling laws, scaling-law classification from
//!   measurements, filter chains, and dual-pump power-imbalance optimization.
//! * [`photon`] — Monte-Carlo generation of detector time-tag streams for a
//!   heralded-pair + converter system, delay histograms, and
//!   coincidence-to-accidental analysis.
//!
//! All operations are pure functions of value inputs; types are `Send + Sync`
//! and safe to share across worker threads. Batch helpers live in [`batch`]
//! and use a rayon thread pool when the `parallel` feature (default) is
//! enabled, with a sequential fallback otherwise.

pub mod batch;
pub mod cmt;
pub mod dispersion;
pub mod error;
pub mod noise;
pub mod photon;
pub mod units;

pub use error::{Error, Result};
