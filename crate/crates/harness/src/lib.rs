//! Experiment harness for the ISAC waveform toolkit: configuration, seeded
//! drivers for the convergence, tradeoff, PAPR and Monte Carlo studies, and
//! CSV / `.cwf` output.

pub mod config;
pub mod cwf;
pub mod error;
pub mod experiments;
pub mod output;
pub mod pipeline;
pub mod seeds;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
