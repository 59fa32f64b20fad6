//! OFDM / array dimensions and the sampling mode they are evaluated in.
//!
//! Every vector in the toolkit is antenna-major within a time (or subcarrier)
//! block: entry `block * n_tx + antenna`. All operator shapes derive from the
//! four fields of [`GridConfig`] plus the [`SamplingMode`].

use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};

/// Nyquist-rate or oversampled time grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    #[default]
    Nyquist,
    Oversampled,
}

/// Dimensions of the MIMO-OFDM frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridConfig {
    /// Transmit antennas.
    pub n_tx: usize,
    /// Subcarriers (equal to the number of effective OFDM symbols).
    pub n_sub: usize,
    /// Cyclic-prefix length in Nyquist-rate symbols.
    pub n_cp: usize,
    /// Oversampling rate; 1 means Nyquist.
    pub os_rate: usize,
}

impl GridConfig {
    pub fn new(n_tx: usize, n_sub: usize, n_cp: usize, os_rate: usize) -> Result<Self> {
        let grid = Self {
            n_tx,
            n_sub,
            n_cp,
            os_rate,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Nt = 8, Ns = 40, Ncp = 32, oversampling 2.
    pub fn baseline() -> Self {
        Self {
            n_tx: 8,
            n_sub: 40,
            n_cp: 32,
            os_rate: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_tx == 0 || self.n_sub == 0 || self.os_rate == 0 {
            return Err(IsacError::InvalidGrid(
                "n_tx, n_sub and os_rate must be positive".into(),
            ));
        }
        if self.n_cp == 0 || self.n_cp > self.n_sub {
            return Err(IsacError::InvalidGrid(format!(
                "n_cp must lie in 1..={} (got {})",
                self.n_sub, self.n_cp
            )));
        }
        if self.n_sub % 2 != 0 && self.os_rate > 1 {
            return Err(IsacError::InvalidGrid(format!(
                "n_sub must be even for oversampling (got {})",
                self.n_sub
            )));
        }
        Ok(())
    }

    /// Time-grid rate factor for `mode` (1 or γ).
    pub fn rate(&self, mode: SamplingMode) -> usize {
        match mode {
            SamplingMode::Nyquist => 1,
            SamplingMode::Oversampled => self.os_rate,
        }
    }

    /// Length of the frequency-domain precoded vector x (Ns·Nt).
    pub fn freq_len(&self) -> usize {
        self.n_sub * self.n_tx
    }

    /// Effective time samples per antenna (Ns or γNs).
    pub fn samples(&self, mode: SamplingMode) -> usize {
        self.rate(mode) * self.n_sub
    }

    /// Cyclic-prefix samples per antenna (Ncp or γNcp).
    pub fn cp_samples(&self, mode: SamplingMode) -> usize {
        self.rate(mode) * self.n_cp
    }

    /// CP-extended frame length per antenna ((Ns+Ncp) or γ(Ns+Ncp)).
    pub fn frame_samples(&self, mode: SamplingMode) -> usize {
        self.samples(mode) + self.cp_samples(mode)
    }

    /// Length of the effective time-domain vector s (all antennas).
    pub fn time_len(&self, mode: SamplingMode) -> usize {
        self.samples(mode) * self.n_tx
    }

    /// Length of the CP-extended time-domain vector.
    pub fn frame_len(&self, mode: SamplingMode) -> usize {
        self.frame_samples(mode) * self.n_tx
    }

    /// Fraction of the total frame energy carried by the effective symbols,
    /// Ns/(Ns+Ncp); identical in both sampling modes.
    pub fn effective_fraction(&self) -> f64 {
        self.n_sub as f64 / (self.n_sub + self.n_cp) as f64
    }

    /// Per-antenna effective energy Ns/(Ns+Ncp)·E_t/Nt.
    pub fn antenna_energy(&self, energy_total: f64) -> f64 {
        self.effective_fraction() * energy_total / self.n_tx as f64
    }

    /// Total energy E_t that makes the effective-symbol energy equal to one.
    pub fn unit_effective_energy_total(&self) -> f64 {
        1.0 / self.effective_fraction()
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self::baseline()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_dimensions() {
        let g = GridConfig::baseline();
        assert_eq!(g.freq_len(), 320);
        assert_eq!(g.time_len(SamplingMode::Nyquist), 320);
        assert_eq!(g.time_len(SamplingMode::Oversampled), 640);
        assert_eq!(g.frame_len(SamplingMode::Nyquist), 72 * 8);
        assert_eq!(g.frame_samples(SamplingMode::Oversampled), 144);
        let e_t = g.unit_effective_energy_total();
        assert!((g.antenna_energy(e_t) * 8.0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridConfig::new(0, 4, 2, 1).is_err());
        assert!(GridConfig::new(2, 4, 5, 1).is_err());
        assert!(GridConfig::new(2, 5, 2, 2).is_err());
        assert!(GridConfig::new(2, 5, 2, 1).is_ok());
    }
}
