//! Rician frequency-selective multi-user MIMO channel.
//!
//! Each user's tap-0 row carries a line-of-sight component along the
//! steering vector of that user's direction (the radar target direction),
//! mixed with scattered Gaussian energy according to the Rician factor K.
//! Later taps are purely scattered. Frequency blocks follow
//! H_n = Σ_t H̃_t e^{−j2πt(n−1)/Ns} and are kept block-diagonal.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, IsacError, Result};
use crate::grid::GridConfig;
use crate::operators::{steering_vector, Synthesis};

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Statistical description of the channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub n_taps: usize,
    pub rician_k: f64,
    /// Dominant-path direction of each user (radians); also fixes U.
    pub los_angles: Vec<f64>,
    /// Relative tap powers; must sum to one.
    pub tap_power_profile: Vec<f64>,
    /// AWGN standard deviation per complex entry.
    pub noise_std: f64,
}

impl ChannelConfig {
    /// T taps with a uniform power profile.
    pub fn uniform(n_taps: usize, rician_k: f64, los_angles: Vec<f64>, noise_std: f64) -> Self {
        Self {
            n_taps,
            rician_k,
            los_angles,
            tap_power_profile: vec![1.0 / n_taps as f64; n_taps],
            noise_std,
        }
    }

    /// T = 4, K = 1, users at ±30°.
    pub fn baseline() -> Self {
        Self::uniform(4, 1.0, vec![(-30f64).to_radians(), 30f64.to_radians()], 0.0)
    }

    pub fn n_users(&self) -> usize {
        self.los_angles.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_taps == 0 || self.los_angles.is_empty() {
            return Err(IsacError::InvalidArgument(
                "channel needs at least one tap and one user".into(),
            ));
        }
        if self.tap_power_profile.len() != self.n_taps {
            return Err(IsacError::LengthMismatch {
                expected: self.n_taps,
                actual: self.tap_power_profile.len(),
            });
        }
        let sum: f64 = self.tap_power_profile.iter().sum();
        if (sum - 1.0).abs() > 1e-12 || self.tap_power_profile.iter().any(|p| *p < 0.0) {
            return Err(IsacError::InvalidArgument(format!(
                "tap power profile must be nonnegative and sum to 1 (sum {sum})"
            )));
        }
        if self.tap_power_profile[0] <= 0.0 {
            return Err(IsacError::InvalidArgument("tap 0 must carry power".into()));
        }
        if !(self.rician_k >= 0.0) || !(self.noise_std >= 0.0) {
            return Err(IsacError::InvalidArgument(
                "Rician factor and noise std must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// One draw of the channel: taps H̃_t (U×Nt) and frequency blocks H_n.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub taps: Vec<CMatrix>,
    pub freq_blocks: Vec<CMatrix>,
    pub seed: u64,
}

pub(crate) fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws the Rician taps for `grid` and assembles the frequency response.
///
/// Tap 0 of user u is √(K/(K+1))·e^{jφ_u}a(θ_u)^T + √(1/(K+1))·CN(0,1); tap t ≥ 1
/// is CN(0, p_t/p_0), so tap 0 has unit average power and the relative profile
/// is kept.
pub fn sample_rician_taps(
    cfg: &ChannelConfig,
    grid: &GridConfig,
    seed: u64,
) -> Result<ChannelRealization> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_users = cfg.n_users();
    let nt = grid.n_tx;
    let k = cfg.rician_k;
    let los_amp = (k / (k + 1.0)).sqrt();
    let nlos_amp = (1.0 / (k + 1.0)).sqrt();
    let p0 = cfg.tap_power_profile[0];

    let mut taps = vec![CMatrix::zeros(n_users, nt); cfg.n_taps];
    for (u, &theta) in cfg.los_angles.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI));
        let a = steering_vector(theta, nt);
        for n in 0..nt {
            taps[0][(u, n)] = los_amp * phase * a[n] + nlos_amp * complex_normal(&mut rng);
        }
        for (t, tap) in taps.iter_mut().enumerate().skip(1) {
            let amp = (cfg.tap_power_profile[t] / p0).sqrt();
            for n in 0..nt {
                tap[(u, n)] = amp * complex_normal(&mut rng);
            }
        }
    }
    Ok(ChannelRealization::from_taps(taps, grid, seed))
}

/// H_n = Σ_t H̃_t e^{−j2πt(n−1)/Ns}, n = 1..Ns.
pub fn assemble_freq_response(taps: &[CMatrix], grid: &GridConfig) -> Vec<CMatrix> {
    let ns = grid.n_sub;
    let (rows, cols) = taps.first().map_or((0, 0), |t| t.shape());
    (0..ns)
        .map(|n| {
            let mut h = CMatrix::zeros(rows, cols);
            for (t, tap) in taps.iter().enumerate() {
                let w = Complex64::from_polar(1.0, -2.0 * PI * ((t * n) % ns) as f64 / ns as f64);
                h += tap * w;
            }
            h
        })
        .collect()
}

impl ChannelRealization {
    pub fn from_taps(taps: Vec<CMatrix>, grid: &GridConfig, seed: u64) -> Self {
        let freq_blocks = assemble_freq_response(&taps, grid);
        Self {
            taps,
            freq_blocks,
            seed,
        }
    }

    /// Channel with H_n = I for every subcarrier (U = Nt, single tap).
    pub fn identity(grid: &GridConfig) -> Self {
        Self::from_taps(vec![CMatrix::identity(grid.n_tx, grid.n_tx)], grid, 0)
    }

    pub fn n_users(&self) -> usize {
        self.freq_blocks.first().map_or(0, |h| h.nrows())
    }

    pub fn n_tx(&self) -> usize {
        self.freq_blocks.first().map_or(0, |h| h.ncols())
    }

    pub fn n_sub(&self) -> usize {
        self.freq_blocks.len()
    }

    /// Largest deviation of the stored blocks from a fresh assembly.
    pub fn assembly_error(&self, grid: &GridConfig) -> f64 {
        assemble_freq_response(&self.taps, grid)
            .iter()
            .zip(&self.freq_blocks)
            .map(|(a, b)| (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    /// Hx, blockwise.
    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let (u, nt) = (self.n_users(), self.n_tx());
        check_len(self.n_sub() * nt, x.len())?;
        let mut out = vec![ZERO; self.n_sub() * u];
        for (n, h) in self.freq_blocks.iter().enumerate() {
            let xn = &x[n * nt..(n + 1) * nt];
            for r in 0..u {
                out[n * u + r] = (0..nt).map(|c| h[(r, c)] * xn[c]).sum();
            }
        }
        Ok(out)
    }

    /// H^H r, blockwise.
    pub fn adjoint(&self, r: &[Complex64]) -> Result<Vec<Complex64>> {
        let (u, nt) = (self.n_users(), self.n_tx());
        check_len(self.n_sub() * u, r.len())?;
        let mut out = vec![ZERO; self.n_sub() * nt];
        for (n, h) in self.freq_blocks.iter().enumerate() {
            let rn = &r[n * u..(n + 1) * u];
            for c in 0..nt {
                out[n * nt + c] = (0..u).map(|q| h[(q, c)].conj() * rn[q]).sum();
            }
        }
        Ok(out)
    }

    /// Ĥs = H(F⊗I)s for Nyquist-rate effective symbols s.
    pub fn effective_apply(&self, s: &[Complex64], grid: &GridConfig) -> Result<Vec<Complex64>> {
        let x = Synthesis::nyquist(grid).analyze(s)?;
        self.apply(&x)
    }

    /// Ĥ^H r = (F^H⊗I)H^H r.
    pub fn effective_adjoint(&self, r: &[Complex64], grid: &GridConfig) -> Result<Vec<Complex64>> {
        Synthesis::nyquist(grid).synthesize(&self.adjoint(r)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ChannelFile::from(self))?)
    }

    /// Parses a saved realization, recomputing and checking the frequency
    /// blocks against the taps.
    pub fn from_json(text: &str, grid: &GridConfig) -> Result<Self> {
        let file: ChannelFile = serde_json::from_str(text)?;
        if file.n_tx != grid.n_tx || file.n_sub != grid.n_sub {
            return Err(IsacError::InvalidArgument(format!(
                "channel file is for Nt={} Ns={}, grid has Nt={} Ns={}",
                file.n_tx, file.n_sub, grid.n_tx, grid.n_sub
            )));
        }
        let taps = file
            .taps
            .iter()
            .map(|t| {
                check_len(file.n_users * file.n_tx, t.len())?;
                Ok(CMatrix::from_row_iterator(
                    file.n_users,
                    file.n_tx,
                    t.iter().map(|[re, im]| Complex64::new(*re, *im)),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_taps(taps, grid, file.seed))
    }
}

/// On-disk form: complex entries as `[re, im]`, taps row-major.
#[derive(Debug, Serialize, Deserialize)]
struct ChannelFile {
    n_users: usize,
    n_tx: usize,
    n_sub: usize,
    seed: u64,
    taps: Vec<Vec<[f64; 2]>>,
}

impl From<&ChannelRealization> for ChannelFile {
    fn from(ch: &ChannelRealization) -> Self {
        let taps = ch
            .taps
            .iter()
            .map(|t| {
                (0..t.nrows())
                    .flat_map(|r| (0..t.ncols()).map(move |c| (r, c)))
                    .map(|(r, c)| [t[(r, c)].re, t[(r, c)].im])
                    .collect()
            })
            .collect();
        Self {
            n_users: ch.n_users(),
            n_tx: ch.n_tx(),
            n_sub: ch.n_sub(),
            seed: ch.seed,
            taps,
        }
    }
}

/// i.i.d. CN(0, noise_std²) samples.
pub fn awgn(len: usize, noise_std: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    awgn_from(&mut rng, len, noise_std)
}

pub(crate) fn awgn_from<R: Rng + ?Sized>(
    rng: &mut R,
    len: usize,
    noise_std: f64,
) -> Vec<Complex64> {
    if noise_std == 0.0 {
        return vec![ZERO; len];
    }
    (0..len).map(|_| complex_normal(rng) * noise_std).collect()
}
