//! Structural linear operators of the MIMO-OFDM signal model.
//!
//! Kronecker-structured products are applied matrix-free: the DFT acts per
//! antenna on the interleaved vector, the CP selector copies trailing blocks,
//! and the direction operator G(θ) projects each CP-extended symbol block on
//! the steering vector. Dense constructions live in [`dense`] behind the
//! `dense-oracle` feature and exist only to verify these routines.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{check_len, IsacError, Result};
use crate::grid::{GridConfig, SamplingMode};
use crate::signal::{FreqVector, SteeringVector, TimeVector};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn dft_entry(n: usize, row: usize, col: usize, scale: f64) -> Complex64 {
    let phase = -2.0 * PI * ((row * col) % n) as f64 / n as f64;
    Complex64::from_polar(scale, phase)
}

/// Normalized Ns×Ns DFT matrix F.
pub fn dft_matrix(grid: &GridConfig) -> DMatrix<Complex64> {
    let n = grid.n_sub;
    let scale = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |i, j| dft_entry(n, i, j, scale))
}

/// Normalized γNs×γNs DFT matrix F_os.
pub fn oversampled_dft_matrix(grid: &GridConfig) -> DMatrix<Complex64> {
    let n = grid.os_rate * grid.n_sub;
    let scale = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |i, j| dft_entry(n, i, j, scale))
}

/// Frequency bins of the γNs-point grid occupied by the Ns subcarriers:
/// the lower half keeps its index, the upper half is moved to the top of the
/// oversampled band (zero-padding in the middle).
pub fn folded_bins(grid: &GridConfig) -> Vec<usize> {
    let ns = grid.n_sub;
    let shift = (grid.os_rate - 1) * ns;
    (0..ns)
        .map(|i| if i < ns / 2 { i } else { shift + i })
        .collect()
}

/// Ns×γNs folded DFT F̃_os: the rows of F_os at the occupied bins.
///
/// Normalized by 1/√(γNs) so that (F̃_os^H⊗I)x equals (F_os^H⊗I)x_os exactly.
pub fn folded_dft_matrix(grid: &GridConfig) -> DMatrix<Complex64> {
    let n = grid.os_rate * grid.n_sub;
    let scale = 1.0 / (n as f64).sqrt();
    let bins = folded_bins(grid);
    DMatrix::from_fn(grid.n_sub, n, |i, j| dft_entry(n, bins[i], j, scale))
}

/// Zero-interpolates x (NsNt) into x_os (γNsNt).
pub fn interpolate_oversample(x: &[Complex64], grid: &GridConfig) -> Result<FreqVector> {
    check_len(grid.freq_len(), x.len())?;
    let nt = grid.n_tx;
    let mut out = vec![ZERO; grid.os_rate * x.len()];
    for (i, bin) in folded_bins(grid).into_iter().enumerate() {
        out[bin * nt..(bin + 1) * nt].copy_from_slice(&x[i * nt..(i + 1) * nt]);
    }
    Ok(FreqVector(out))
}

/// Per-antenna inverse DFT from a set of occupied frequency bins onto an
/// `n_time`-point time grid, i.e. (F^H⊗I), (F_os^H⊗I) or (F̃_os^H⊗I).
#[derive(Debug, Clone)]
pub struct Synthesis {
    n_tx: usize,
    n_time: usize,
    bins: Vec<usize>,
    scale: f64,
    twiddle: Vec<Complex64>,
}

impl Synthesis {
    fn with_bins(n_tx: usize, n_time: usize, bins: Vec<usize>) -> Self {
        let twiddle = (0..n_time)
            .map(|t| Complex64::from_polar(1.0, 2.0 * PI * t as f64 / n_time as f64))
            .collect();
        Self {
            n_tx,
            n_time,
            bins,
            scale: 1.0 / (n_time as f64).sqrt(),
            twiddle,
        }
    }

    /// (F^H⊗I_Nt).
    pub fn nyquist(grid: &GridConfig) -> Self {
        Self::with_bins(grid.n_tx, grid.n_sub, (0..grid.n_sub).collect())
    }

    /// (F_os^H⊗I_Nt) acting on the full zero-interpolated vector.
    pub fn full_oversampled(grid: &GridConfig) -> Self {
        let n = grid.os_rate * grid.n_sub;
        Self::with_bins(grid.n_tx, n, (0..n).collect())
    }

    /// (F̃_os^H⊗I_Nt): band-limited oversampled synthesis straight from x.
    pub fn folded(grid: &GridConfig) -> Self {
        Self::with_bins(grid.n_tx, grid.os_rate * grid.n_sub, folded_bins(grid))
    }

    /// The x → s map used in `mode`.
    pub fn for_mode(grid: &GridConfig, mode: SamplingMode) -> Self {
        match mode {
            SamplingMode::Nyquist => Self::nyquist(grid),
            SamplingMode::Oversampled => Self::folded(grid),
        }
    }

    pub fn freq_len(&self) -> usize {
        self.bins.len() * self.n_tx
    }

    pub fn time_len(&self) -> usize {
        self.n_time * self.n_tx
    }

    /// s = B x.
    pub fn synthesize(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.freq_len(), x.len())?;
        let nt = self.n_tx;
        let mut s = vec![ZERO; self.time_len()];
        for m in 0..self.n_time {
            let out = &mut s[m * nt..(m + 1) * nt];
            for (i, &bin) in self.bins.iter().enumerate() {
                let w = self.twiddle[(bin * m) % self.n_time];
                for (o, xi) in out.iter_mut().zip(&x[i * nt..(i + 1) * nt]) {
                    *o += w * xi;
                }
            }
            for o in out.iter_mut() {
                *o *= self.scale;
            }
        }
        Ok(s)
    }

    /// x = B^H s (the adjoint; the inverse whenever B is square).
    pub fn analyze(&self, s: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.time_len(), s.len())?;
        let nt = self.n_tx;
        let mut x = vec![ZERO; self.freq_len()];
        for (i, &bin) in self.bins.iter().enumerate() {
            let out = &mut x[i * nt..(i + 1) * nt];
            for m in 0..self.n_time {
                let w = self.twiddle[(bin * m) % self.n_time].conj();
                for (o, sm) in out.iter_mut().zip(&s[m * nt..(m + 1) * nt]) {
                    *o += w * sm;
                }
            }
            for o in out.iter_mut() {
                *o *= self.scale;
            }
        }
        Ok(x)
    }
}

/// s = (F^H⊗I)x for x of length NsNt, or s_os = (F_os^H⊗I)x_os for an
/// interpolated x of length γNsNt.
pub fn to_time_domain(x: &[Complex64], grid: &GridConfig) -> Result<TimeVector> {
    if x.len() == grid.freq_len() {
        Ok(TimeVector::effective(
            Synthesis::nyquist(grid).synthesize(x)?,
            SamplingMode::Nyquist,
        ))
    } else if grid.os_rate > 1 && x.len() == grid.os_rate * grid.freq_len() {
        Ok(TimeVector::effective(
            Synthesis::full_oversampled(grid).synthesize(x)?,
            SamplingMode::Oversampled,
        ))
    } else {
        Err(IsacError::LengthMismatch {
            expected: grid.freq_len(),
            actual: x.len(),
        })
    }
}

/// Inverse of [`to_time_domain`].
pub fn to_freq_domain(s: &TimeVector, grid: &GridConfig) -> Result<FreqVector> {
    if s.cp_included {
        return Err(IsacError::InvalidArgument(
            "expected effective symbols without CP".into(),
        ));
    }
    let op = match s.mode {
        SamplingMode::Nyquist => Synthesis::nyquist(grid),
        SamplingMode::Oversampled => Synthesis::full_oversampled(grid),
    };
    Ok(FreqVector(op.analyze(&s.data)?))
}

/// Prepends the trailing CP blocks: Γs.
pub fn add_cp(s: &TimeVector, grid: &GridConfig) -> Result<TimeVector> {
    if s.cp_included {
        return Err(IsacError::InvalidArgument("CP already included".into()));
    }
    check_len(grid.time_len(s.mode), s.len())?;
    let nt = grid.n_tx;
    let cp = grid.cp_samples(s.mode) * nt;
    let start = s.len() - cp;
    let mut out = Vec::with_capacity(s.len() + cp);
    out.extend_from_slice(&s.data[start..]);
    out.extend_from_slice(&s.data);
    Ok(TimeVector {
        data: out,
        mode: s.mode,
        cp_included: true,
    })
}

/// Γ^H r: folds the CP blocks of a frame-length vector back onto their
/// source blocks.
pub fn cp_adjoint(
    r: &[Complex64],
    grid: &GridConfig,
    mode: SamplingMode,
) -> Result<Vec<Complex64>> {
    check_len(grid.frame_len(mode), r.len())?;
    let cp = grid.cp_samples(mode) * grid.n_tx;
    let mut out = r[cp..].to_vec();
    let start = out.len() - cp;
    for (o, c) in out[start..].iter_mut().zip(&r[..cp]) {
        *o += c;
    }
    Ok(out)
}

/// C_l s: the samples of antenna `antenna` (0-based).
pub fn antenna_select(s: &[Complex64], antenna: usize, n_tx: usize) -> Result<Vec<Complex64>> {
    if antenna >= n_tx {
        return Err(IsacError::AntennaOutOfRange {
            index: antenna,
            n_tx,
        });
    }
    if s.len() % n_tx != 0 {
        return Err(IsacError::InvalidArgument(format!(
            "length {} not a multiple of {n_tx} antennas",
            s.len()
        )));
    }
    Ok(s.iter().skip(antenna).step_by(n_tx).copied().collect())
}

/// Inverse of per-antenna selection: interleaves Nt equal-length sequences.
pub fn interleave_antennas(parts: &[Vec<Complex64>]) -> Result<Vec<Complex64>> {
    let n_tx = parts.len();
    let n = parts.first().map_or(0, Vec::len);
    if parts.iter().any(|p| p.len() != n) {
        return Err(IsacError::InvalidArgument(
            "ragged antenna sequences".into(),
        ));
    }
    let mut out = vec![ZERO; n * n_tx];
    for (l, p) in parts.iter().enumerate() {
        for (i, v) in p.iter().enumerate() {
            out[i * n_tx + l] = *v;
        }
    }
    Ok(out)
}

/// a(θ) with entries exp(j(n − Nt/2)π sinθ), n = 1..Nt.
pub fn steering_vector(theta: f64, n_tx: usize) -> SteeringVector {
    let half = n_tx as f64 / 2.0;
    let u = PI * theta.sin();
    SteeringVector(
        (1..=n_tx)
            .map(|n| Complex64::from_polar(1.0, (n as f64 - half) * u))
            .collect(),
    )
}

/// G(θ) = (I⊗a(θ))^T Γ, applied matrix-free.
#[derive(Debug, Clone)]
pub struct DirectionOperator {
    steering: SteeringVector,
    grid: GridConfig,
    mode: SamplingMode,
}

impl DirectionOperator {
    pub fn new(theta: f64, grid: &GridConfig, mode: SamplingMode) -> Self {
        Self {
            steering: steering_vector(theta, grid.n_tx),
            grid: *grid,
            mode,
        }
    }

    pub fn steering(&self) -> &SteeringVector {
        &self.steering
    }

    /// Output length (frame samples per antenna).
    pub fn rows(&self) -> usize {
        self.grid.frame_samples(self.mode)
    }

    pub fn cols(&self) -> usize {
        self.grid.time_len(self.mode)
    }

    /// s_v = G(θ)s for effective symbols s.
    pub fn apply(&self, s: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(s.len(), self.cols());
        let nt = self.grid.n_tx;
        let n_eff = self.grid.samples(self.mode);
        let n_cp = self.grid.cp_samples(self.mode);
        let a = &self.steering.0;
        (0..self.rows())
            .map(|i| {
                let block = if i < n_cp { n_eff - n_cp + i } else { i - n_cp };
                s[block * nt..(block + 1) * nt]
                    .iter()
                    .zip(a)
                    .map(|(x, w)| x * w)
                    .sum()
            })
            .collect()
    }

    /// G(θ)^H r.
    pub fn adjoint(&self, r: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(r.len(), self.rows());
        let nt = self.grid.n_tx;
        let n_eff = self.grid.samples(self.mode);
        let n_cp = self.grid.cp_samples(self.mode);
        let a = &self.steering.0;
        let mut out = vec![ZERO; self.cols()];
        for (i, ri) in r.iter().enumerate() {
            let block = if i < n_cp { n_eff - n_cp + i } else { i - n_cp };
            for (o, w) in out[block * nt..(block + 1) * nt].iter_mut().zip(a) {
                *o += w.conj() * ri;
            }
        }
        out
    }
}

/// Doppler phase of 0-based sample `m`: D_f = diag(e^{j2πf·1}, …).
fn doppler_phase(f: f64, m: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * f * (m + 1) as f64)
}

/// J_k D_f v: Doppler modulation followed by a shift by `k` with zero fill.
pub fn delay_doppler_apply(v: &[Complex64], k: isize, f: f64) -> Vec<Complex64> {
    let n = v.len() as isize;
    (0..n)
        .map(|i| {
            let j = i - k;
            if (0..n).contains(&j) {
                doppler_phase(f, j as usize) * v[j as usize]
            } else {
                ZERO
            }
        })
        .collect()
}

/// (J_k D_f)^H w = D_f^H J_k^T w.
pub fn delay_doppler_adjoint(w: &[Complex64], k: isize, f: f64) -> Vec<Complex64> {
    let n = w.len() as isize;
    (0..n)
        .map(|j| {
            let i = j + k;
            if (0..n).contains(&i) {
                doppler_phase(f, j as usize).conj() * w[i as usize]
            } else {
                ZERO
            }
        })
        .collect()
}

/// v^H J_k D_f v in O(L).
pub fn delay_doppler_correlation(v: &[Complex64], k: isize, f: f64) -> Complex64 {
    let n = v.len() as isize;
    let lo = k.max(0);
    let hi = n.min(n + k);
    (lo..hi)
        .map(|i| {
            let j = (i - k) as usize;
            v[i as usize].conj() * doppler_phase(f, j) * v[j]
        })
        .sum()
}

#[cfg(any(test, feature = "dense-oracle"))]
pub mod dense {
    //! Explicit matrices for the structured operators.

    use super::*;

    pub fn identity(n: usize) -> DMatrix<Complex64> {
        DMatrix::identity(n, n)
    }

    pub fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let (ar, ac) = a.shape();
        let (br, bc) = b.shape();
        DMatrix::from_fn(ar * br, ac * bc, |i, j| {
            a[(i / br, j / bc)] * b[(i % br, j % bc)]
        })
    }

    /// (F^H⊗I) for Nyquist, (F̃_os^H⊗I) for oversampled.
    pub fn synthesis_matrix(grid: &GridConfig, mode: SamplingMode) -> DMatrix<Complex64> {
        let f = match mode {
            SamplingMode::Nyquist => dft_matrix(grid),
            SamplingMode::Oversampled => folded_dft_matrix(grid),
        };
        kron(&f.adjoint(), &identity(grid.n_tx))
    }

    /// Γ = [Γ_cp; I].
    pub fn cp_matrix(grid: &GridConfig, mode: SamplingMode) -> DMatrix<Complex64> {
        let n = grid.time_len(mode);
        let cp = grid.cp_samples(mode) * grid.n_tx;
        DMatrix::from_fn(n + cp, n, |i, j| {
            let hit = if i < cp { j == i + n - cp } else { j == i - cp };
            if hit {
                Complex64::new(1.0, 0.0)
            } else {
                ZERO
            }
        })
    }

    /// G(θ) = (I⊗a(θ))^T Γ.
    pub fn direction_matrix(
        theta: f64,
        grid: &GridConfig,
        mode: SamplingMode,
    ) -> DMatrix<Complex64> {
        let a = steering_vector(theta, grid.n_tx);
        let a_col = DMatrix::from_column_slice(grid.n_tx, 1, &a.0);
        let i = identity(grid.frame_samples(mode));
        kron(&i, &a_col).transpose() * cp_matrix(grid, mode)
    }

    pub fn delay_matrix(n: usize, k: isize) -> DMatrix<Complex64> {
        DMatrix::from_fn(n, n, |i, j| {
            if i as isize - j as isize == k {
                Complex64::new(1.0, 0.0)
            } else {
                ZERO
            }
        })
    }

    pub fn doppler_matrix(n: usize, f: f64) -> DMatrix<Complex64> {
        DMatrix::from_fn(n, n, |i, j| if i == j { doppler_phase(f, i) } else { ZERO })
    }

    /// C_l (0-based antenna).
    pub fn antenna_selector(n_samples: usize, n_tx: usize, antenna: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(n_samples, n_samples * n_tx, |i, j| {
            if j == i * n_tx + antenna {
                Complex64::new(1.0, 0.0)
            } else {
                ZERO
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::energy;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    fn to_dvec(v: &[Complex64]) -> nalgebra::DVector<Complex64> {
        nalgebra::DVector::from_column_slice(v)
    }

    fn max_entry(m: &DMatrix<Complex64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    fn grid(nt: usize, ns: usize, ncp: usize, os: usize) -> GridConfig {
        GridConfig::new(nt, ns, ncp, os).unwrap()
    }

    #[test]
    fn dft_small_cases() {
        let f1 = dft_matrix(&grid(1, 1, 1, 1));
        assert_abs_diff_eq!(f1[(0, 0)].re, 1.0, epsilon = 1e-15);
        let f2 = dft_matrix(&grid(1, 2, 1, 1));
        let h = 1.0 / 2f64.sqrt();
        let expect = [[h, h], [h, -h]];
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(f2[(i, j)].re, expect[i][j], epsilon = 1e-15);
                assert_abs_diff_eq!(f2[(i, j)].im, 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn dft_matrices_are_unitary() {
        let g = grid(8, 40, 32, 2);
        for f in [dft_matrix(&g), oversampled_dft_matrix(&g)] {
            let n = f.nrows();
            let err = max_entry(&(f.adjoint() * &f - DMatrix::<Complex64>::identity(n, n)));
            assert!(err < 1e-12, "unitarity error {err}");
        }
    }

    #[test]
    fn oversampled_reduces_to_nyquist_at_rate_one() {
        let g = grid(2, 6, 2, 1);
        assert!(max_entry(&(oversampled_dft_matrix(&g) - dft_matrix(&g))) < 1e-15);
        assert!(max_entry(&(folded_dft_matrix(&g) - dft_matrix(&g))) < 1e-15);
    }

    #[test]
    fn folded_row_uses_upper_bin() {
        // Ns = 2, γ = 2: row 2 carries bin 3 of the 4-point grid.
        let g = grid(1, 2, 1, 2);
        let f = folded_dft_matrix(&g);
        for j in 0..4 {
            let expect = Complex64::from_polar(0.5, -2.0 * PI * 3.0 * j as f64 / 4.0);
            assert!((f[(1, j)] - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn interpolate_small_case() {
        let g = grid(1, 2, 1, 2);
        let x = [c(1.0, 2.0), c(3.0, -1.0)];
        let xo = interpolate_oversample(&x, &g).unwrap();
        assert_eq!(xo.0, vec![x[0], ZERO, ZERO, x[1]]);
        let g1 = grid(1, 2, 1, 1);
        assert_eq!(interpolate_oversample(&x, &g1).unwrap().0, x.to_vec());
        assert!(interpolate_oversample(&x[..1], &g).is_err());
    }

    #[test]
    fn fold_identity_matches_interpolated_synthesis() {
        let g = grid(3, 8, 2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_vec(&mut rng, g.freq_len());
        let xo = interpolate_oversample(&x, &g).unwrap();
        let lhs = to_time_domain(&xo, &g).unwrap();
        let rhs = Synthesis::folded(&g).synthesize(&x).unwrap();
        assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn impulse_in_frequency_is_constant_in_time() {
        let g = grid(2, 4, 1, 1);
        let mut x = vec![ZERO; 8];
        x[0] = c(1.0, 0.0);
        x[1] = c(0.0, 2.0);
        let s = to_time_domain(&x, &g).unwrap();
        for m in 0..4 {
            assert!((s[2 * m] - c(0.5, 0.0)).norm() < 1e-15);
            assert!((s[2 * m + 1] - c(0.0, 1.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn synthesis_matches_dense_kron() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for mode in [SamplingMode::Nyquist, SamplingMode::Oversampled] {
            let g = grid(2, 8, 3, 2);
            let x = random_vec(&mut rng, g.freq_len());
            let dense = dense::synthesis_matrix(&g, mode) * to_dvec(&x);
            let op = Synthesis::for_mode(&g, mode);
            let s = op.synthesize(&x).unwrap();
            assert!(max_abs_diff(&s, dense.as_slice()) < 1e-12);
            let back = op.analyze(&s).unwrap();
            assert!(max_abs_diff(&back, &x) < 1e-12);
        }
    }

    #[test]
    fn add_cp_copies_trailing_blocks() {
        let g = grid(2, 4, 4, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = TimeVector::effective(random_vec(&mut rng, 8), SamplingMode::Nyquist);
        let full = add_cp(&s, &g).unwrap();
        assert_eq!(&full[..8], &s[..]);
        assert_eq!(&full[8..], &s[..]);

        let g = grid(2, 4, 1, 1);
        let full = add_cp(&s, &g).unwrap();
        assert_eq!(&full[..2], &s[6..8]);
        let extra = energy(&s[6..8]);
        assert_abs_diff_eq!(full.energy(), s.energy() + extra, epsilon = 1e-12);
        let dense = dense::cp_matrix(&g, SamplingMode::Nyquist) * to_dvec(&s);
        assert_eq!(dense.as_slice(), &full[..]);
    }

    #[test]
    fn antenna_selection() {
        let s = [c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)];
        assert_eq!(antenna_select(&s, 0, 2).unwrap(), vec![s[0], s[2]]);
        assert_eq!(antenna_select(&s, 1, 2).unwrap(), vec![s[1], s[3]]);
        assert_eq!(antenna_select(&s, 0, 1).unwrap(), s.to_vec());
        assert!(matches!(
            antenna_select(&s, 2, 2),
            Err(IsacError::AntennaOutOfRange { .. })
        ));
        let parts = vec![
            antenna_select(&s, 0, 2).unwrap(),
            antenna_select(&s, 1, 2).unwrap(),
        ];
        assert_eq!(interleave_antennas(&parts).unwrap(), s.to_vec());
    }

    #[test]
    fn steering_properties() {
        let a0 = steering_vector(0.0, 6);
        assert!(a0.iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-15));
        for k in -90..=90 {
            let th = (k as f64).to_radians();
            let a = steering_vector(th, 8);
            let b = steering_vector(-th, 8);
            assert_abs_diff_eq!(energy(&a), 8.0, epsilon = 1e-12);
            assert!(a
                .iter()
                .zip(b.iter())
                .all(|(x, y)| (x.conj() - y).norm() < 1e-12));
        }
    }

    #[test]
    fn direction_operator_matches_dense_and_blockwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for mode in [SamplingMode::Nyquist, SamplingMode::Oversampled] {
            let g = grid(3, 6, 2, 2);
            let s = random_vec(&mut rng, g.time_len(mode));
            let th = 0.4;
            let op = DirectionOperator::new(th, &g, mode);
            let sv = op.apply(&s);
            let dense = dense::direction_matrix(th, &g, mode);
            let dv = &dense * to_dvec(&s);
            assert!(max_abs_diff(&sv, dv.as_slice()) < 1e-12);

            // blockwise evaluation on the CP-extended vector
            let full = add_cp(&TimeVector::effective(s.clone(), mode), &g).unwrap();
            let a = steering_vector(th, 3);
            for (i, v) in sv.iter().enumerate() {
                let expect: Complex64 = full[i * 3..i * 3 + 3]
                    .iter()
                    .zip(a.iter())
                    .map(|(x, w)| x * w)
                    .sum();
                assert!((v - expect).norm() < 1e-12);
            }

            let r = random_vec(&mut rng, op.rows());
            let adj = op.adjoint(&r);
            let dadj = dense.adjoint() * to_dvec(&r);
            assert!(max_abs_diff(&adj, dadj.as_slice()) < 1e-12);
        }
    }

    #[test]
    fn single_antenna_direction_is_cp_extension() {
        let g = grid(1, 5, 2, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = random_vec(&mut rng, 5);
        let op = DirectionOperator::new(0.7, &g, SamplingMode::Nyquist);
        let full = add_cp(&TimeVector::effective(s.clone(), SamplingMode::Nyquist), &g).unwrap();
        // a(θ) is the single unit-modulus phase e^{jπ sinθ/2}
        let phase = op.steering()[0];
        let expect: Vec<_> = full.iter().map(|z| z * phase).collect();
        assert!(max_abs_diff(&op.apply(&s), &expect) < 1e-15);
        let at_broadside = DirectionOperator::new(0.0, &g, SamplingMode::Nyquist);
        assert!(max_abs_diff(&at_broadside.apply(&s), &full) < 1e-15);
    }

    #[test]
    fn delay_doppler_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let v = random_vec(&mut rng, 8);
        assert_eq!(delay_doppler_apply(&v, 0, 0.0), v);
        assert!(delay_doppler_apply(&v, 8, 0.1).iter().all(|z| *z == ZERO));
        assert!(delay_doppler_apply(&v, -8, 0.1).iter().all(|z| *z == ZERO));
        for k in [-3isize, 0, 3] {
            let m = dense::delay_matrix(8, k) * dense::doppler_matrix(8, 0.1);
            let dv = &m * to_dvec(&v);
            assert!(max_abs_diff(&delay_doppler_apply(&v, k, 0.1), dv.as_slice()) < 1e-12);
            let w = random_vec(&mut rng, 8);
            let da = m.adjoint() * to_dvec(&w);
            assert!(max_abs_diff(&delay_doppler_adjoint(&w, k, 0.1), da.as_slice()) < 1e-12);
            let u = (to_dvec(&v).adjoint() * dv)[(0, 0)];
            assert!((delay_doppler_correlation(&v, k, 0.1) - u).norm() < 1e-12);
        }
    }
}
