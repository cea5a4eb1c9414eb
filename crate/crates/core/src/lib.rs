//! Adaptive-time frequency estimation (ATFE) for two-level quantum probes.
//!
//! The crate is organised bottom-up:
//!
//! - [`probe`]: dimensionless probe model, locally optimal POVMs and Born
//!   probabilities for single qubits, parallel product states and GHZ states.
//! - [`inference`]: log-likelihoods, restricted-domain maximum likelihood,
//!   normal quantiles, confidence intervals and the Holevo variance.
//! - [`adaptive`]: the AQSE inner loop and the confidence-interval gated
//!   sensing-time schedule (GHZ and parallel product variants).
//! - [`bounds`]: closed-form Cramér-Rao style bounds and resource formulas.
//! - [`harness`]: seeded Monte Carlo ensembles, GHZ vs product comparisons
//!   and canned figure reproductions written as CSV + JSON.
//!
//! All frequencies and times are dimensionless: `omega = (w - w0) / dw` lives
//! in `[-1, 1)` and `t = time * dw / 2pi`.

pub mod adaptive;
pub mod bounds;
pub mod error;
pub mod harness;
pub mod inference;
pub mod probe;
pub mod rng;

pub use error::{Error, Result};

/// Version string written into every JSON sidecar.
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
