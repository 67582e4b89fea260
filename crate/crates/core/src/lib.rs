//! Citation-visibility metrics for generative answer engines, treated as
//! sample estimators with quantified uncertainty.

pub mod cli;
pub mod corpus;
pub mod dispersion;
pub mod driftwatch;
pub mod error;
pub mod metrics;
pub mod overlap;
pub mod resample;
pub mod stability;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
