//! Prognostics and health management toolkit: vibration signal processing,
//! spectral and wavelet transforms, hand-crafted degradation features, a
//! small neural-network engine, evaluation metrics, remaining-useful-life
//! modelling and synthetic data generators.

pub mod error;
pub mod features;
pub mod fitness;
pub mod io;
pub mod metrics;
pub mod nn;
pub mod pipeline;
pub mod prognostics;
pub mod rng;
pub mod signals;
pub mod spectral;
pub mod synth;

pub use error::{Error, Result};
