//! Beampattern, ambiguity function, ISL/ISLR and echo SNR.
//!
//! Angles are radians throughout. The beampattern uses the same steering
//! convention as the direction operator, b(θ) = mean_n |a(θ)^T s_n|², so the
//! snapshot and time-domain forms agree exactly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};
use crate::grid::{GridConfig, SamplingMode};
use crate::operators::{add_cp, delay_doppler_correlation, steering_vector, DirectionOperator};
use crate::signal::{energy, TimeVector};

/// Floor returned by [`islr`] when every sidelobe is exactly zero.
pub const ISLR_FLOOR_DB: f64 = -300.0;

/// Targets, pattern grid, ideal mask and the delay–Doppler region Δ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarScene {
    pub target_angles: Vec<f64>,
    pub pattern_grid: Vec<f64>,
    pub ideal_pattern: Vec<f64>,
    pub delay_doppler_set: Vec<(isize, f64)>,
}

/// Shape of the rectangular ideal mask and of the angle grid it lives on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskSpec {
    pub width_deg: f64,
    pub grid_min_deg: f64,
    pub grid_max_deg: f64,
    pub grid_step_deg: f64,
}

impl Default for MaskSpec {
    fn default() -> Self {
        Self {
            width_deg: 10.0,
            grid_min_deg: -90.0,
            grid_max_deg: 90.0,
            grid_step_deg: 1.0,
        }
    }
}

impl MaskSpec {
    pub fn angle_grid(&self) -> Vec<f64> {
        let n = ((self.grid_max_deg - self.grid_min_deg) / self.grid_step_deg).round() as usize;
        (0..=n)
            .map(|i| (self.grid_min_deg + i as f64 * self.grid_step_deg).to_radians())
            .collect()
    }
}

/// Δ = {k ∈ [−max_k, max_k]} × dopplers, without (0, 0).
pub fn delay_doppler_set(max_k: usize, dopplers: &[f64]) -> Vec<(isize, f64)> {
    let m = max_k as isize;
    (-m..=m)
        .flat_map(|k| dopplers.iter().map(move |&f| (k, f)))
        .filter(|&(k, f)| !(k == 0 && f == 0.0))
        .collect()
}

/// Average power per transmitted sample (all antennas) for a frame of energy E_t.
pub fn mean_sample_power(grid: &GridConfig, mode: SamplingMode, energy_total: f64) -> f64 {
    energy_total / grid.frame_samples(mode) as f64
}

/// ½∫ b(θ) cosθ dθ by the trapezoid rule; equals the per-sample total power
/// tr R for any covariance when the grid spans [−90°, 90°].
pub fn pattern_power(angles: &[f64], pattern: &[f64]) -> f64 {
    angles
        .windows(2)
        .zip(pattern.windows(2))
        .map(|(t, b)| 0.25 * (t[1] - t[0]) * (b[0] * t[0].cos() + b[1] * t[1].cos()))
        .sum()
}

impl RadarScene {
    pub fn new(
        target_angles: Vec<f64>,
        pattern_grid: Vec<f64>,
        ideal_pattern: Vec<f64>,
        delay_doppler_set: Vec<(isize, f64)>,
    ) -> Result<Self> {
        let scene = Self {
            target_angles,
            pattern_grid,
            ideal_pattern,
            delay_doppler_set,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ideal_pattern.len() != self.pattern_grid.len() {
            return Err(IsacError::LengthMismatch {
                expected: self.pattern_grid.len(),
                actual: self.ideal_pattern.len(),
            });
        }
        if self.ideal_pattern.iter().any(|d| !(*d >= 0.0)) {
            return Err(IsacError::InvalidArgument(
                "ideal pattern must be nonnegative".into(),
            ));
        }
        if self
            .delay_doppler_set
            .iter()
            .any(|&(k, f)| k == 0 && f == 0.0)
        {
            return Err(IsacError::InvalidArgument(
                "delay-Doppler set must exclude (0, 0)".into(),
            ));
        }
        for t in &self.target_angles {
            if !self.pattern_grid.iter().any(|g| (g - t).abs() < 1e-9) {
                return Err(IsacError::InvalidArgument(format!(
                    "target angle {:.3}° is not on the pattern grid",
                    t.to_degrees()
                )));
            }
        }
        Ok(())
    }

    /// Flat-top mask of `spec.width_deg` around each target. The level is set so
    /// that [`pattern_power`] of the mask equals `sample_power`.
    pub fn rectangular(
        target_angles: &[f64],
        spec: &MaskSpec,
        sample_power: f64,
        delay_doppler_set: Vec<(isize, f64)>,
    ) -> Result<Self> {
        let grid = spec.angle_grid();
        let half = (spec.width_deg / 2.0).to_radians() + 1e-9;
        let support: Vec<f64> = grid
            .iter()
            .map(|g| {
                let inside = target_angles.iter().any(|t| (g - t).abs() <= half);
                if inside {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let area = pattern_power(&grid, &support);
        if area <= 0.0 {
            return Err(IsacError::InvalidArgument(
                "mask has no support on the grid".into(),
            ));
        }
        let level = sample_power / area;
        let ideal = support.iter().map(|s| s * level).collect();
        let targets = target_angles
            .iter()
            .map(|t| {
                grid.iter()
                    .copied()
                    .min_by(|a, b| (a - t).abs().total_cmp(&(b - t).abs()))
                    .unwrap_or(*t)
            })
            .collect();
        Self::new(targets, grid, ideal, delay_doppler_set)
    }

    /// Targets at ±30°, default mask, f = 0 and |k| up to the CP length.
    pub fn baseline(grid: &GridConfig, mode: SamplingMode, energy_total: f64) -> Result<Self> {
        Self::symmetric(30.0, grid, mode, energy_total)
    }

    /// Targets at ±`angle_deg` with the default mask and delay region.
    pub fn symmetric(
        angle_deg: f64,
        grid: &GridConfig,
        mode: SamplingMode,
        energy_total: f64,
    ) -> Result<Self> {
        let targets = [(-angle_deg).to_radians(), angle_deg.to_radians()];
        Self::rectangular(
            &targets,
            &MaskSpec::default(),
            mean_sample_power(grid, mode, energy_total),
            delay_doppler_set(grid.cp_samples(mode), &[0.0]),
        )
    }
}

/// χ(θ, k, f) over a (k, f) grid, stored k-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguitySurface {
    pub theta: f64,
    pub delays: Vec<isize>,
    pub dopplers: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub peak: f64,
}

impl AmbiguitySurface {
    pub fn get(&self, ki: usize, fi: usize) -> f64 {
        self.values[ki][fi]
    }
}

/// b(θ) = (1/N)Σ_n |a(θ)^T s_n|² over Nt-sample snapshots.
pub fn beam_pattern_cov(snapshots: &[Vec<Complex64>], theta_grid: &[f64]) -> Result<Vec<f64>> {
    let first = snapshots
        .first()
        .ok_or_else(|| IsacError::InvalidArgument("no snapshots".into()))?;
    let nt = first.len();
    let n = snapshots.len() as f64;
    theta_grid
        .iter()
        .map(|&th| {
            let a = steering_vector(th, nt);
            let mut acc = 0.0;
            for s in snapshots {
                crate::error::check_len(nt, s.len())?;
                let y: Complex64 = a.iter().zip(s).map(|(w, x)| w * x).sum();
                acc += y.norm_sqr();
            }
            Ok(acc / n)
        })
        .collect()
}

/// Splits the CP-extended frame of `s` into per-sample antenna snapshots.
pub fn frame_snapshots(s: &TimeVector, grid: &GridConfig) -> Result<Vec<Vec<Complex64>>> {
    let frame = if s.cp_included {
        s.clone()
    } else {
        add_cp(s, grid)?
    };
    Ok(frame.data.chunks(grid.n_tx).map(|c| c.to_vec()).collect())
}

/// b(θ) = ‖G(θ)s‖²/(frame samples) for effective symbols s.
pub fn beam_pattern_time(
    s: &TimeVector,
    theta_grid: &[f64],
    grid: &GridConfig,
) -> Result<Vec<f64>> {
    s.check(grid)?;
    if s.cp_included {
        return Err(IsacError::InvalidArgument(
            "expected effective symbols".into(),
        ));
    }
    let denom = grid.frame_samples(s.mode) as f64;
    Ok(theta_grid
        .iter()
        .map(|&th| energy(&DirectionOperator::new(th, grid, s.mode).apply(s)) / denom)
        .collect())
}

/// χ(θ, k, f) = |s_v^H J_k D_f s_v|² for every k in `delays` and f in `dopplers`.
pub fn ambiguity(
    s: &TimeVector,
    theta: f64,
    delays: &[isize],
    dopplers: &[f64],
    grid: &GridConfig,
) -> Result<AmbiguitySurface> {
    s.check(grid)?;
    let sv = DirectionOperator::new(theta, grid, s.mode).apply(s);
    let max_k = sv.len() as isize;
    if let Some(k) = delays.iter().find(|k| k.abs() > max_k) {
        return Err(IsacError::InvalidArgument(format!(
            "delay {k} beyond ±{max_k}"
        )));
    }
    let values = delays
        .iter()
        .map(|&k| {
            dopplers
                .iter()
                .map(|&f| delay_doppler_correlation(&sv, k, f).norm_sqr())
                .collect()
        })
        .collect();
    Ok(AmbiguitySurface {
        theta,
        delays: delays.to_vec(),
        dopplers: dopplers.to_vec(),
        values,
        peak: energy(&sv).powi(2),
    })
}

fn sidelobe_sum(sv: &[Complex64], set: &[(isize, f64)]) -> f64 {
    set.iter()
        .map(|&(k, f)| delay_doppler_correlation(sv, k, f).norm_sqr())
        .sum()
}

/// Σ_{θ∈Ω_d} Σ_{(k,f)∈Δ} χ(θ, k, f).
pub fn isl(s: &TimeVector, scene: &RadarScene, grid: &GridConfig) -> Result<f64> {
    s.check(grid)?;
    Ok(scene
        .target_angles
        .iter()
        .map(|&th| {
            let sv = DirectionOperator::new(th, grid, s.mode).apply(s);
            sidelobe_sum(&sv, &scene.delay_doppler_set)
        })
        .sum())
}

/// 10·log10 of the sidelobe-to-peak ratio averaged over the target angles.
pub fn islr(s: &TimeVector, scene: &RadarScene, grid: &GridConfig) -> Result<f64> {
    s.check(grid)?;
    if scene.target_angles.is_empty() {
        return Err(IsacError::InvalidArgument(
            "scene has no target angles".into(),
        ));
    }
    let mut ratio = 0.0;
    for &th in &scene.target_angles {
        let sv = DirectionOperator::new(th, grid, s.mode).apply(s);
        let peak = energy(&sv).powi(2);
        if peak <= 0.0 {
            return Err(IsacError::DegenerateWaveform(format!(
                "zero mainlobe at {:.2}°",
                th.to_degrees()
            )));
        }
        ratio += sidelobe_sum(&sv, &scene.delay_doppler_set) / peak;
    }
    ratio /= scene.target_angles.len() as f64;
    Ok(if ratio > 0.0 {
        (10.0 * ratio.log10()).max(ISLR_FLOOR_DB)
    } else {
        ISLR_FLOOR_DB
    })
}

/// 10·log10(b(θ)·loss_over_noise).
pub fn echo_snr(
    s: &TimeVector,
    theta: f64,
    loss_over_noise: f64,
    grid: &GridConfig,
) -> Result<f64> {
    if !(loss_over_noise > 0.0) {
        return Err(IsacError::InvalidArgument(
            "loss_over_noise must be positive".into(),
        ));
    }
    let b = beam_pattern_time(s, &[theta], grid)?[0];
    Ok(10.0 * (b * loss_over_noise).log10())
}

/// ‖b − d‖₂ over the scene's pattern grid.
pub fn pattern_mismatch(s: &TimeVector, scene: &RadarScene, grid: &GridConfig) -> Result<f64> {
    let b = beam_pattern_time(s, &scene.pattern_grid, grid)?;
    Ok(b.iter()
        .zip(&scene.ideal_pattern)
        .map(|(x, d)| (x - d).powi(2))
        .sum::<f64>()
        .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::dense;
    use nalgebra::DVector;

    fn rand_vec(n: usize, seed: u64) -> Vec<Complex64> {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| crate::channel::complex_normal(&mut rng))
            .collect()
    }

    fn small() -> GridConfig {
        GridConfig::new(2, 4, 2, 2).unwrap()
    }

    #[test]
    fn identity_covariance_gives_flat_pattern() {
        let nt = 4;
        let snaps: Vec<Vec<Complex64>> = (0..nt)
            .map(|i| {
                let mut e = vec![Complex64::new(0.0, 0.0); nt];
                e[i] = Complex64::new((nt as f64).sqrt(), 0.0);
                e
            })
            .collect();
        for v in beam_pattern_cov(&snaps, &[-1.0, 0.0, 0.3]).unwrap() {
            assert!((v - nt as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn matched_snapshot_peaks_at_nt() {
        let nt = 8;
        let th = 0.4;
        let a = steering_vector(th, nt);
        let snap: Vec<_> = a.iter().map(|z| z.conj() / (nt as f64).sqrt()).collect();
        let b = beam_pattern_cov(&[snap], &[th]).unwrap();
        assert!((b[0] - nt as f64).abs() < 1e-12);
        assert!(beam_pattern_cov(&[], &[0.0]).is_err());
    }

    #[test]
    fn time_and_snapshot_patterns_agree() {
        let g = GridConfig::baseline();
        for mode in [SamplingMode::Nyquist, SamplingMode::Oversampled] {
            let s = TimeVector::effective(rand_vec(g.time_len(mode), 3), mode);
            let thetas: Vec<f64> = (-9..=9).map(|i| i as f64 * 0.17).collect();
            let bt = beam_pattern_time(&s, &thetas, &g).unwrap();
            let bc = beam_pattern_cov(&frame_snapshots(&s, &g).unwrap(), &thetas).unwrap();
            for (x, y) in bt.iter().zip(&bc) {
                assert!((x - y).abs() < 1e-10 * x.max(1.0));
            }
        }
    }

    #[test]
    fn single_antenna_pattern_is_flat() {
        let g = GridConfig::new(1, 8, 3, 1).unwrap();
        let s = TimeVector::effective(rand_vec(8, 1), SamplingMode::Nyquist);
        let frame = add_cp(&s, &g).unwrap();
        let expect = frame.energy() / 11.0;
        for b in beam_pattern_time(&s, &[-1.2, 0.0, 0.9], &g).unwrap() {
            assert!((b - expect).abs() < 1e-12);
        }
        let z = TimeVector::zeros(&g, SamplingMode::Nyquist);
        assert!(beam_pattern_time(&z, &[0.1], &g).unwrap()[0] == 0.0);
    }

    #[test]
    fn ambiguity_peak_and_full_shift() {
        let g = small();
        let s = TimeVector::effective(rand_vec(8, 4), SamplingMode::Nyquist);
        let l = g.frame_samples(SamplingMode::Nyquist) as isize;
        let surf = ambiguity(&s, 0.3, &[0, l, -l], &[0.0, 0.1], &g).unwrap();
        let sv = DirectionOperator::new(0.3, &g, SamplingMode::Nyquist).apply(&s);
        let p = energy(&sv).powi(2);
        assert!((surf.get(0, 0) - p).abs() < 1e-10 * p);
        assert!((surf.peak - p).abs() < 1e-10 * p);
        assert_eq!(surf.get(1, 0), 0.0);
        assert_eq!(surf.get(2, 1), 0.0);
        assert!(ambiguity(&s, 0.3, &[l + 1], &[0.0], &g).is_err());
    }

    #[test]
    fn ambiguity_matches_dense_oracle() {
        // L = 8 per-antenna frame samples
        let g = GridConfig::new(2, 6, 2, 1).unwrap();
        let s = TimeVector::effective(rand_vec(12, 5), SamplingMode::Nyquist);
        let th = -0.6;
        let gm = dense::direction_matrix(th, &g, SamplingMode::Nyquist);
        let sv = &gm * DVector::from_column_slice(&s);
        let delays: Vec<isize> = (-8..=8).collect();
        let dopplers = [0.0, 0.05, -0.2];
        let surf = ambiguity(&s, th, &delays, &dopplers, &g).unwrap();
        for (ki, &k) in delays.iter().enumerate() {
            for (fi, &f) in dopplers.iter().enumerate() {
                let m = dense::delay_matrix(8, k) * dense::doppler_matrix(8, f);
                let chi = (sv.adjoint() * &m * &sv)[(0, 0)].norm_sqr();
                assert!((chi - surf.get(ki, fi)).abs() < 1e-10 * surf.peak);
            }
        }
    }

    #[test]
    fn isl_special_cases() {
        let g = small();
        let s = TimeVector::effective(rand_vec(8, 6), SamplingMode::Nyquist);
        let grid = MaskSpec::default().angle_grid();
        let l = g.frame_samples(SamplingMode::Nyquist) as isize;
        let out = RadarScene::new(
            vec![0.0],
            grid.clone(),
            vec![0.0; grid.len()],
            vec![(l, 0.0)],
        )
        .unwrap();
        assert_eq!(isl(&s, &out, &g).unwrap(), 0.0);
        assert_eq!(islr(&s, &out, &g).unwrap(), ISLR_FLOOR_DB);

        let th = 20f64.to_radians();
        let one = RadarScene::new(
            vec![th],
            grid.clone(),
            vec![0.0; grid.len()],
            vec![(2, 0.1)],
        )
        .unwrap();
        let surf = ambiguity(&s, th, &[2], &[0.1], &g).unwrap();
        assert!((isl(&s, &one, &g).unwrap() - surf.get(0, 0)).abs() < 1e-12 * surf.peak);
    }

    #[test]
    fn islr_zero_db_when_sidelobes_equal_peak() {
        // one nonzero effective sample on one antenna, θ = 0: s_v is a pair of
        // equal impulses (sample and its CP copy) separated by Ns
        let g = GridConfig::new(1, 4, 4, 1).unwrap();
        let mut s = TimeVector::zeros(&g, SamplingMode::Nyquist);
        s[0] = Complex64::new(1.0, 0.0);
        let grid = MaskSpec::default().angle_grid();
        let scene = RadarScene::new(
            vec![0.0],
            grid.clone(),
            vec![0.0; grid.len()],
            vec![(4, 0.0), (-4, 0.0)],
        )
        .unwrap();
        // χ(0,0) = 4, χ(±4, 0) = 1 each → ratio 1/2; doubling the set gives 1
        let scene2 = RadarScene {
            delay_doppler_set: vec![(4, 0.0), (-4, 0.0), (4, 0.0), (-4, 0.0)],
            ..scene.clone()
        };
        assert!((islr(&s, &scene, &g).unwrap() + 10.0 * 2f64.log10()).abs() < 1e-12);
        assert!(islr(&s, &scene2, &g).unwrap().abs() < 1e-12);
        let z = TimeVector::zeros(&g, SamplingMode::Nyquist);
        assert!(matches!(
            islr(&z, &scene, &g),
            Err(IsacError::DegenerateWaveform(_))
        ));
    }

    #[test]
    fn echo_snr_log_identity() {
        let g = GridConfig::baseline();
        let s = TimeVector::effective(rand_vec(320, 8), SamplingMode::Nyquist);
        let a = echo_snr(&s, 0.5, 3.0, &g).unwrap();
        let b = echo_snr(&s, 0.5, 6.0, &g).unwrap();
        assert!((b - a - 10.0 * 2f64.log10()).abs() < 1e-12);
        assert!(echo_snr(&s, 0.5, 0.0, &g).is_err());
    }

    #[test]
    fn baseline_scene_layout() {
        let g = GridConfig::baseline();
        let e_t = g.unit_effective_energy_total();
        let sc = RadarScene::baseline(&g, SamplingMode::Nyquist, e_t).unwrap();
        assert_eq!(sc.pattern_grid.len(), 181);
        assert_eq!(sc.delay_doppler_set.len(), 64);
        assert_eq!(sc.ideal_pattern.iter().filter(|d| **d > 0.0).count(), 22);
        let p = pattern_power(&sc.pattern_grid, &sc.ideal_pattern);
        assert!((p - e_t / 72.0).abs() < 1e-12);
        let os = RadarScene::baseline(&g, SamplingMode::Oversampled, e_t).unwrap();
        assert_eq!(os.delay_doppler_set.len(), 128);
        let bad = RadarScene::new(
            vec![0.001],
            sc.pattern_grid.clone(),
            sc.ideal_pattern.clone(),
            vec![],
        );
        assert!(bad.is_err());
    }
}
