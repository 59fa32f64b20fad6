//! Communication-side metrics: MUI, per-antenna PAPR, QPSK link, SER, sum rate.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{awgn_from, complex_normal, ChannelRealization};
use crate::error::{check_len, IsacError, Result};
use crate::grid::{GridConfig, SamplingMode};
use crate::operators::{antenna_select, Synthesis};
use crate::signal::{energy, sub};

/// Unit-energy Gray-mapped QPSK symbols s_D, subcarrier-major with the user
/// index varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstellationSymbols {
    pub data: Vec<Complex64>,
}

impl ConstellationSymbols {
    /// Uniformly random symbols for Ns subcarriers and `n_users` users.
    pub fn random(n_sub: usize, n_users: usize, seed: u64) -> Self {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits: Vec<bool> = (0..2 * n_sub * n_users).map(|_| rng.random()).collect();
        Self {
            data: map_bits(&bits),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn energy(&self) -> f64 {
        energy(&self.data)
    }

    /// Whether every entry lies on the unit-energy QPSK constellation.
    pub fn is_valid(&self) -> bool {
        self.data.iter().all(|z| {
            (z.re.abs() - FRAC_1_SQRT_2).abs() < 1e-12 && (z.im.abs() - FRAC_1_SQRT_2).abs() < 1e-12
        })
    }
}

fn map_bits(bits: &[bool]) -> Vec<Complex64> {
    bits.chunks(2)
        .map(|b| {
            let re = if b[0] { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
            let im = if b[1] { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
            Complex64::new(re, im)
        })
        .collect()
}

/// Gray mapping: bit pair (b₀, b₁) → ((1−2b₀) + j(1−2b₁))/√2.
pub fn qpsk_modulate(
    bits: &[bool],
    grid: &GridConfig,
    n_users: usize,
) -> Result<ConstellationSymbols> {
    check_len(2 * grid.n_sub * n_users, bits.len())?;
    Ok(ConstellationSymbols {
        data: map_bits(bits),
    })
}

/// Nearest-constellation-point decision per symbol, returned as bits.
pub fn qpsk_detect(y: &[Complex64]) -> Vec<bool> {
    y.iter().flat_map(|z| [z.re < 0.0, z.im < 0.0]).collect()
}

/// Nearest constellation point for each received sample.
pub fn qpsk_decide(y: &[Complex64]) -> Vec<Complex64> {
    y.iter()
        .map(|z| {
            let re = if z.re < 0.0 {
                -FRAC_1_SQRT_2
            } else {
                FRAC_1_SQRT_2
            };
            let im = if z.im < 0.0 {
                -FRAC_1_SQRT_2
            } else {
                FRAC_1_SQRT_2
            };
            Complex64::new(re, im)
        })
        .collect()
}

/// AWGN standard deviation for unit-energy symbols at the given Es/N0.
pub fn noise_std_from_esn0_db(esn0_db: f64) -> f64 {
    10f64.powf(-esn0_db / 20.0)
}

/// ‖Hx − s_D‖².
pub fn mui_energy(
    h: &ChannelRealization,
    x: &[Complex64],
    s_d: &ConstellationSymbols,
) -> Result<f64> {
    let hx = h.apply(x)?;
    check_len(hx.len(), s_d.len())?;
    Ok(energy(&sub(&hx, &s_d.data)))
}

/// Per-antenna PAPR (linear) and the worst antenna in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaprReport {
    pub per_antenna: Vec<f64>,
    pub max_db: f64,
}

/// PAPR of each antenna's time sequence in an antenna-interleaved vector.
pub fn papr_time(s: &[Complex64], n_tx: usize) -> Result<PaprReport> {
    if n_tx == 0 || s.len() % n_tx != 0 {
        return Err(IsacError::InvalidArgument(format!(
            "length {} is not a multiple of {n_tx} antennas",
            s.len()
        )));
    }
    let n = (s.len() / n_tx) as f64;
    let per_antenna = (0..n_tx)
        .map(|l| {
            let c = antenna_select(s, l, n_tx)?;
            let e = energy(&c);
            if e <= 0.0 {
                return Err(IsacError::AntennaSilent(l));
            }
            let peak = c.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
            Ok(peak / (e / n))
        })
        .collect::<Result<Vec<_>>>()?;
    let max = per_antenna.iter().copied().fold(0.0, f64::max);
    Ok(PaprReport {
        per_antenna,
        max_db: 10.0 * max.log10(),
    })
}

/// PAPR of the time sequence synthesized from x: (F^H⊗I)x at Nyquist rate or
/// (F̃_os^H⊗I)x on the γNs grid.
pub fn papr(x: &[Complex64], grid: &GridConfig, mode: SamplingMode) -> Result<PaprReport> {
    check_len(grid.freq_len(), x.len())?;
    let s = Synthesis::for_mode(grid, mode).synthesize(x)?;
    papr_time(&s, grid.n_tx)
}

/// Fraction of QPSK symbol errors for y = Hx + z over `n_trials` noise draws.
/// Trial t draws its noise from stream t of the seeded generator.
pub fn empirical_ser(
    h: &ChannelRealization,
    x: &[Complex64],
    s_d: &ConstellationSymbols,
    noise_std: f64,
    n_trials: usize,
    seed: u64,
) -> Result<f64> {
    if n_trials == 0 {
        return Err(IsacError::InvalidArgument(
            "n_trials must be at least 1".into(),
        ));
    }
    let hx = h.apply(x)?;
    check_len(hx.len(), s_d.len())?;
    let mut errors = 0usize;
    for t in 0..n_trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let z = awgn_from(&mut rng, hx.len(), noise_std);
        let y: Vec<Complex64> = hx.iter().zip(&z).map(|(a, b)| a + b).collect();
        errors += qpsk_decide(&y)
            .iter()
            .zip(&s_d.data)
            .filter(|(d, s)| (*d - *s).norm() > 1e-9)
            .count();
    }
    Ok(errors as f64 / (n_trials * hx.len()) as f64)
}

/// (1/Ns)Σ_{n,u} log2(1 + |s_D|²/(|[Hx − s_D]|² + σ²)).
pub fn sum_rate(
    h: &ChannelRealization,
    x: &[Complex64],
    s_d: &ConstellationSymbols,
    noise_std: f64,
) -> Result<f64> {
    if !(noise_std > 0.0) {
        return Err(IsacError::InvalidArgument(
            "noise_std must be positive".into(),
        ));
    }
    let hx = h.apply(x)?;
    check_len(hx.len(), s_d.len())?;
    let n2 = noise_std * noise_std;
    let total: f64 = hx
        .iter()
        .zip(&s_d.data)
        .map(|(r, s)| (1.0 + s.norm_sqr() / ((r - s).norm_sqr() + n2)).log2())
        .sum();
    Ok(total / h.n_sub() as f64)
}

/// Random complex Gaussian frequency-domain vector, for tests and demos.
pub fn random_freq(grid: &GridConfig, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..grid.freq_len())
        .map(|_| complex_normal(&mut rng))
        .collect()
}
