//! Batch front end for the converter toolkit: scenario configs with shipped
//! device presets, single-point runs and parameter sweeps, noise-scaling
//! classification of measured count rates, and delay histograms of recorded
//! time-tag files. Results are emitted as provenance-stamped CSV or JSON
//! tables; identical inputs (including seeds) give byte-identical outputs.

pub mod config;
pub mod error;
pub mod scenario;
pub mod table;

pub use error::CliError;
