//! Complex symbol vectors of the signal model.

use std::ops::{Deref, DerefMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, IsacError, Result};
use crate::grid::{GridConfig, SamplingMode};

/// Squared l2 norm.
pub fn energy(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn norm(v: &[Complex64]) -> f64 {
    energy(v).sqrt()
}

/// Hermitian inner product a^H b.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn sub(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(v: &[Complex64], c: f64) -> Vec<Complex64> {
    v.iter().map(|z| z * c).collect()
}

/// Frequency-domain precoded vector x, subcarrier-major with the antenna
/// index varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreqVector(pub Vec<Complex64>);

impl FreqVector {
    pub fn new(data: Vec<Complex64>) -> Self {
        Self(data)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }
}

impl Deref for FreqVector {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl DerefMut for FreqVector {
    fn deref_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }
}

/// Time-domain symbol vector s (effective symbols) or its CP-extended form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeVector {
    pub data: Vec<Complex64>,
    pub mode: SamplingMode,
    pub cp_included: bool,
}

impl TimeVector {
    pub fn effective(data: Vec<Complex64>, mode: SamplingMode) -> Self {
        Self {
            data,
            mode,
            cp_included: false,
        }
    }

    pub fn zeros(grid: &GridConfig, mode: SamplingMode) -> Self {
        Self::effective(vec![Complex64::new(0.0, 0.0); grid.time_len(mode)], mode)
    }

    /// Checks the length against the grid for this vector's mode and CP flag.
    pub fn check(&self, grid: &GridConfig) -> Result<()> {
        let expected = if self.cp_included {
            grid.frame_len(self.mode)
        } else {
            grid.time_len(self.mode)
        };
        check_len(expected, self.data.len())?;
        if self
            .data
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(IsacError::InvalidArgument("non-finite sample".into()));
        }
        Ok(())
    }

    pub fn energy(&self) -> f64 {
        energy(&self.data)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            data: scale(&self.data, c),
            mode: self.mode,
            cp_included: self.cp_included,
        }
    }
}

impl Deref for TimeVector {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.data
    }
}

impl DerefMut for TimeVector {
    fn deref_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }
}

/// Transmit steering vector a(θ), unit-modulus entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector(pub Vec<Complex64>);

impl Deref for SteeringVector {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}
