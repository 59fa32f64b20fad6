//! Integrated sensing-and-communication waveform design for MIMO-OFDM.

pub mod admm;
pub mod channel;
pub mod comm_metrics;
pub mod error;
pub mod grid;
pub mod ideal_waveform;
pub mod operators;
pub mod radar_metrics;
pub mod signal;

pub use error::{IsacError, Result};
pub use grid::{GridConfig, SamplingMode};
pub use signal::{FreqVector, SteeringVector, TimeVector};
