//! Diversity-multiplexing tradeoff tooling for ARQ dynamic decode-and-forward
//! protocols in the relay, multiple-access relay (MAR) and cooperative vector
//! multiple-access (CVMA) channels.
//!
//! - [`analytic`]: exact closed-form tradeoff curves.
//! - [`outage`]: outage regions over channel exponential orders and an
//!   infimum engine that re-derives the curves numerically.
//! - [`sim`]: finite-SNR Monte Carlo of the protocols.
//! - [`lab`]: literal random-codebook bounded-distance decoders.
//! - [`manifest`]: experiment manifests behind the `ddf-dmt` binary.

pub mod analytic;
pub mod curve;
pub mod error;
pub mod lab;
pub mod manifest;
pub mod outage;
pub mod sim;

pub use error::{Error, Result};
