use thiserror::Error;

/// Errors raised by the waveform-design toolkit.
#[derive(Debug, Error)]
pub enum IsacError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("antenna index {index} out of range for {n_tx} antennas")]
    AntennaOutOfRange { index: usize, n_tx: usize },

    #[error("antenna {0} silent")]
    AntennaSilent(usize),

    #[error("degenerate waveform: {0}")]
    DegenerateWaveform(String),

    #[error("zero-energy input cannot be normalized")]
    ZeroEnergy,

    #[error("infeasible constraints: {0}")]
    Infeasible(String),

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("non-finite iterate at iteration {0}")]
    NonFinite(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = IsacError> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(IsacError::LengthMismatch { expected, actual })
    }
}
