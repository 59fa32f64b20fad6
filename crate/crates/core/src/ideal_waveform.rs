//! Ideal radar waveform by L-BFGS, and the MUI-only communication waveform.
//!
//! The radar objective is
//!
//! ```text
//! f(s) = Σ_{θ∈Ω_d} Σ_{(k,f)∈Δ} |s_vᴴ J_k D_f s_v|² + w·Σ_{θ∈Ω_all} (‖s_v‖²/L − d(θ))²
//! ```
//!
//! with s_v = G(θ)s and L the CP-extended frame length of the sampling mode.
//! Optimization runs over the stacked real vector [Re s; Im s], where the real
//! gradient is twice the conjugate Wirtinger derivative.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{complex_normal, ChannelRealization};
use crate::comm_metrics::ConstellationSymbols;
use crate::error::{check_len, IsacError, Result};
use crate::grid::{GridConfig, SamplingMode};
use crate::operators::{
    delay_doppler_adjoint, delay_doppler_apply, delay_doppler_correlation, DirectionOperator,
    Synthesis,
};
use crate::radar_metrics::RadarScene;
use crate::signal::{energy, FreqVector, TimeVector};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdealObjectiveSpec {
    pub scene: RadarScene,
    pub grid: GridConfig,
    pub mode: SamplingMode,
    pub beam_weight: f64,
}

impl IdealObjectiveSpec {
    /// Uses the default weight L², L = frame samples of `mode`.
    pub fn new(scene: RadarScene, grid: GridConfig, mode: SamplingMode) -> Self {
        let l = grid.frame_samples(mode) as f64;
        Self {
            scene,
            grid,
            mode,
            beam_weight: l * l,
        }
    }

    pub fn with_beam_weight(mut self, w: f64) -> Self {
        self.beam_weight = w;
        self
    }

    pub fn len(&self) -> usize {
        self.grid.time_len(self.mode)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Precomputed direction operators for repeated evaluation.
pub struct IdealObjective<'a> {
    spec: &'a IdealObjectiveSpec,
    targets: Vec<DirectionOperator>,
    pattern: Vec<DirectionOperator>,
    frame: f64,
}

impl<'a> IdealObjective<'a> {
    pub fn new(spec: &'a IdealObjectiveSpec) -> Self {
        let op = |th: &f64| DirectionOperator::new(*th, &spec.grid, spec.mode);
        Self {
            spec,
            targets: spec.scene.target_angles.iter().map(op).collect(),
            pattern: spec.scene.pattern_grid.iter().map(op).collect(),
            frame: spec.grid.frame_samples(spec.mode) as f64,
        }
    }

    /// (sidelobe term, weighted mask term).
    pub fn terms(&self, s: &[Complex64]) -> (f64, f64) {
        let isl: f64 = self
            .targets
            .iter()
            .map(|g| {
                let sv = g.apply(s);
                self.spec
                    .scene
                    .delay_doppler_set
                    .iter()
                    .map(|&(k, f)| delay_doppler_correlation(&sv, k, f).norm_sqr())
                    .sum::<f64>()
            })
            .sum();
        let mask: f64 = self
            .pattern
            .iter()
            .zip(&self.spec.scene.ideal_pattern)
            .map(|(g, d)| (energy(&g.apply(s)) / self.frame - d).powi(2))
            .sum();
        (isl, self.spec.beam_weight * mask)
    }

    pub fn value(&self, s: &[Complex64]) -> f64 {
        let (a, b) = self.terms(s);
        a + b
    }

    /// Conjugate Wirtinger derivative ∂f/∂s̄.
    pub fn wirtinger(&self, s: &[Complex64]) -> (f64, Vec<Complex64>) {
        let mut grad = vec![ZERO; s.len()];
        let mut value = 0.0;
        for g in &self.targets {
            let sv = g.apply(s);
            let mut r = vec![ZERO; sv.len()];
            for &(k, f) in &self.spec.scene.delay_doppler_set {
                let u = delay_doppler_correlation(&sv, k, f);
                value += u.norm_sqr();
                if u == ZERO {
                    continue;
                }
                let fwd = delay_doppler_apply(&sv, k, f);
                let bwd = delay_doppler_adjoint(&sv, k, f);
                for ((ri, a), b) in r.iter_mut().zip(&fwd).zip(&bwd) {
                    *ri += u.conj() * a + u * b;
                }
            }
            for (gi, x) in grad.iter_mut().zip(g.adjoint(&r)) {
                *gi += x;
            }
        }
        let w = self.spec.beam_weight;
        for (g, d) in self.pattern.iter().zip(&self.spec.scene.ideal_pattern) {
            let sv = g.apply(s);
            let resid = energy(&sv) / self.frame - d;
            value += w * resid * resid;
            let c = 2.0 * w * resid / self.frame;
            if c == 0.0 {
                continue;
            }
            for (gi, x) in grad.iter_mut().zip(g.adjoint(&sv)) {
                *gi += x * c;
            }
        }
        (value, grad)
    }

    /// Objective and real gradient over [Re s; Im s].
    pub fn value_and_real_gradient(&self, p: &[f64]) -> (f64, Vec<f64>) {
        let s = unstack(p);
        let (v, g) = self.wirtinger(&s);
        (v, stack_scaled(&g, 2.0))
    }
}

/// [Re s; Im s].
pub fn stack(s: &[Complex64]) -> Vec<f64> {
    stack_scaled(s, 1.0)
}

fn stack_scaled(s: &[Complex64], c: f64) -> Vec<f64> {
    s.iter()
        .map(|z| c * z.re)
        .chain(s.iter().map(|z| c * z.im))
        .collect()
}

pub fn unstack(p: &[f64]) -> Vec<Complex64> {
    let n = p.len() / 2;
    (0..n).map(|i| Complex64::new(p[i], p[n + i])).collect()
}

pub fn ideal_objective(s: &TimeVector, spec: &IdealObjectiveSpec) -> Result<f64> {
    check_len(spec.len(), s.len())?;
    Ok(IdealObjective::new(spec).value(s))
}

/// Real gradient (length 2·N, re parts then im parts).
pub fn ideal_gradient(s: &TimeVector, spec: &IdealObjectiveSpec) -> Result<Vec<f64>> {
    check_len(spec.len(), s.len())?;
    let (_, g) = IdealObjective::new(spec).wirtinger(s);
    Ok(stack_scaled(&g, 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LbfgsConfig {
    pub memory: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub armijo_c1: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self {
            memory: 10,
            max_iters: 500,
            grad_tol: 1e-6,
            armijo_c1: 1e-4,
            backtrack: 0.5,
            max_backtracks: 50,
        }
    }
}

impl LbfgsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.memory == 0
            || !(self.grad_tol > 0.0)
            || !(0.0 < self.backtrack && self.backtrack < 1.0)
        {
            return Err(IsacError::InvalidArgument(
                "L-BFGS needs memory ≥ 1, grad_tol > 0 and a backtrack factor in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LbfgsStatus {
    Converged,
    MaxIterations,
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub status: LbfgsStatus,
    /// Objective at the start point and after every accepted step.
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Two-loop-recursion L-BFGS with Armijo backtracking on a smooth function
/// returning (value, gradient).
pub fn lbfgs<F>(mut fg: F, x0: Vec<f64>, cfg: &LbfgsConfig) -> LbfgsResult
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut x = x0;
    let (mut fx, mut g) = fg(&x);
    let mut history = vec![fx];
    let mut pairs: std::collections::VecDeque<(Vec<f64>, Vec<f64>, f64)> = Default::default();
    let mut status = LbfgsStatus::MaxIterations;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        let gnorm = dot(&g, &g).sqrt();
        if gnorm <= cfg.grad_tol {
            status = LbfgsStatus::Converged;
            break;
        }

        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(pairs.len());
        for (s, y, rho) in pairs.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        let h0 = match pairs.back() {
            Some((s, y, _)) => dot(s, y) / dot(y, y),
            None => 1.0 / gnorm,
        };
        q.iter_mut().for_each(|qi| *qi *= h0);
        for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut d: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            pairs.clear();
            d = g.iter().map(|v| -v / gnorm).collect();
            slope = dot(&g, &d);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_backtracks {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            let (fnew, gnew) = fg(&xn);
            if fnew <= fx + cfg.armijo_c1 * step * slope {
                accepted = Some((xn, fnew, gnew));
                break;
            }
            step *= cfg.backtrack;
        }
        let Some((xn, fnew, gnew)) = accepted else {
            status = LbfgsStatus::Stalled;
            break;
        };

        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if pairs.len() == cfg.memory {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }
        x = xn;
        fx = fnew;
        g = gnew;
        history.push(fx);
        iterations += 1;
    }

    LbfgsResult {
        grad_norm: dot(&g, &g).sqrt(),
        x,
        value: fx,
        iterations,
        status,
        history,
    }
}

/// Circularly-symmetric Gaussian start point with energy `target_energy`.
pub fn random_init(
    grid: &GridConfig,
    mode: SamplingMode,
    target_energy: f64,
    seed: u64,
) -> TimeVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<Complex64> = (0..grid.time_len(mode))
        .map(|_| complex_normal(&mut rng))
        .collect();
    let c = (target_energy / energy(&raw)).sqrt();
    TimeVector::effective(raw.iter().map(|z| z * c).collect(), mode)
}

/// Designed waveform (before normalization) with the optimizer report.
#[derive(Debug, Clone)]
pub struct IdealDesign {
    pub s: TimeVector,
    pub report: LbfgsResult,
}

/// Minimizes the ideal objective from `init`. The seed only matters when
/// `init` is `None`, in which case a unit-energy Gaussian start is drawn.
pub fn lbfgs_minimize(
    spec: &IdealObjectiveSpec,
    cfg: &LbfgsConfig,
    init: Option<&TimeVector>,
    seed: u64,
) -> Result<IdealDesign> {
    cfg.validate()?;
    let start = match init {
        Some(s) => {
            check_len(spec.len(), s.len())?;
            s.clone()
        }
        None => random_init(&spec.grid, spec.mode, 1.0, seed),
    };
    let obj = IdealObjective::new(spec);
    let report = lbfgs(|p| obj.value_and_real_gradient(p), stack(&start), cfg);
    if !report.value.is_finite() {
        return Err(IsacError::NonFinite(report.iterations));
    }
    Ok(IdealDesign {
        s: TimeVector::effective(unstack(&report.x), spec.mode),
        report,
    })
}

/// s·√(E/‖s‖²).
pub fn normalize_energy(s: &TimeVector, target_energy: f64) -> Result<TimeVector> {
    let e = s.energy();
    if !(e > 0.0) {
        return Err(IsacError::ZeroEnergy);
    }
    Ok(s.scaled((target_energy / e).sqrt()))
}

/// Minimum-norm zero-MUI precoder output.
#[derive(Debug, Clone, PartialEq)]
pub struct CommWaveform {
    pub x: FreqVector,
    /// Nyquist-rate time-domain symbols (F^H⊗I)x.
    pub s: TimeVector,
    /// Whether some block needed the ridge fallback.
    pub regularized: bool,
}

impl CommWaveform {
    /// Time-domain symbols on the grid of `mode`.
    pub fn in_mode(&self, grid: &GridConfig, mode: SamplingMode) -> Result<TimeVector> {
        Ok(TimeVector::effective(
            Synthesis::for_mode(grid, mode).synthesize(&self.x)?,
            mode,
        ))
    }
}

const RIDGE: f64 = 1e-10;

/// Per subcarrier, x_n = H_nᴴ(H_n H_nᴴ)⁻¹ s_{D,n}.
pub fn ideal_comm_waveform(
    h: &ChannelRealization,
    s_d: &ConstellationSymbols,
    grid: &GridConfig,
) -> Result<CommWaveform> {
    let (u, nt) = (h.n_users(), h.n_tx());
    check_len(grid.n_sub * u, s_d.len())?;
    check_len(grid.n_sub, h.n_sub())?;
    let mut x = vec![ZERO; grid.freq_len()];
    let mut regularized = false;
    for (n, hn) in h.freq_blocks.iter().enumerate() {
        let gram = hn * hn.adjoint();
        let chol = match Cholesky::new(gram.clone()) {
            Some(c)
                if c.l()
                    .diagonal()
                    .iter()
                    .all(|d| d.re > 1e-7 * gram.trace().re.sqrt().max(1e-300)) =>
            {
                c
            }
            _ => {
                regularized = true;
                Cholesky::new(gram + DMatrix::identity(u, u) * Complex64::new(RIDGE, 0.0))
                    .ok_or_else(|| {
                        IsacError::Factorization(format!(
                            "subcarrier {n}: Gram matrix not positive definite"
                        ))
                    })?
            }
        };
        let rhs = DVector::from_column_slice(&s_d.data[n * u..(n + 1) * u]);
        let xn = hn.adjoint() * chol.solve(&rhs);
        x[n * nt..(n + 1) * nt].copy_from_slice(xn.as_slice());
    }
    let s = Synthesis::nyquist(grid).synthesize(&x)?;
    Ok(CommWaveform {
        x: FreqVector(x),
        s: TimeVector::effective(s, SamplingMode::Nyquist),
        regularized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radar_metrics::{delay_doppler_set, MaskSpec};

    fn small_spec(mode: SamplingMode) -> IdealObjectiveSpec {
        let g = GridConfig::new(2, 4, 2, 2).unwrap();
        let scene = RadarScene::rectangular(
            &[(-30f64).to_radians(), 30f64.to_radians()],
            &MaskSpec {
                grid_step_deg: 10.0,
                ..MaskSpec::default()
            },
            0.2,
            delay_doppler_set(g.cp_samples(mode), &[0.0, 0.1]),
        )
        .unwrap();
        IdealObjectiveSpec::new(scene, g, mode)
    }

    #[test]
    fn zero_waveform_leaves_only_mask() {
        for mode in [SamplingMode::Nyquist, SamplingMode::Oversampled] {
            let spec = small_spec(mode);
            let z = TimeVector::zeros(&spec.grid, mode);
            let expect =
                spec.beam_weight * spec.scene.ideal_pattern.iter().map(|d| d * d).sum::<f64>();
            assert!((ideal_objective(&z, &spec).unwrap() - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn empty_scene_is_zero_at_origin() {
        let mut spec = small_spec(SamplingMode::Nyquist);
        spec.scene.delay_doppler_set.clear();
        spec.scene.ideal_pattern.iter_mut().for_each(|d| *d = 0.0);
        let z = TimeVector::zeros(&spec.grid, SamplingMode::Nyquist);
        assert_eq!(ideal_objective(&z, &spec).unwrap(), 0.0);
        assert!(ideal_gradient(&z, &spec).unwrap().iter().all(|g| *g == 0.0));
    }

    #[test]
    fn weights_default_to_frame_length_squared() {
        assert_eq!(small_spec(SamplingMode::Nyquist).beam_weight, 36.0);
        assert_eq!(small_spec(SamplingMode::Oversampled).beam_weight, 144.0);
    }

    #[test]
    fn lbfgs_solves_quadratic() {
        // f(x) = Σ i·(x_i − i)², minimizer x_i = i
        let f = |x: &[f64]| {
            let v = x
                .iter()
                .enumerate()
                .map(|(i, xi)| (i + 1) as f64 * (xi - i as f64).powi(2))
                .sum();
            let g = x
                .iter()
                .enumerate()
                .map(|(i, xi)| 2.0 * (i + 1) as f64 * (xi - i as f64))
                .collect();
            (v, g)
        };
        let r = lbfgs(f, vec![0.0; 6], &LbfgsConfig::default());
        assert_eq!(r.status, LbfgsStatus::Converged);
        for (i, xi) in r.x.iter().enumerate() {
            assert!((xi - i as f64).abs() < 1e-6);
        }
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn lbfgs_flags_stall_on_bad_gradient() {
        // gradient points uphill, so no step can satisfy Armijo
        let f = |x: &[f64]| (x[0] * x[0], vec![-2.0 * x[0] - 1.0]);
        let r = lbfgs(f, vec![1.0], &LbfgsConfig::default());
        assert_eq!(r.status, LbfgsStatus::Stalled);
        assert_eq!(r.x, vec![1.0]);
    }

    #[test]
    fn normalize_is_exact_and_idempotent() {
        let s = random_init(&GridConfig::baseline(), SamplingMode::Nyquist, 3.7, 1);
        assert!((s.energy() - 3.7).abs() < 1e-12);
        let a = normalize_energy(&s, 1.0).unwrap();
        let b = normalize_energy(&a, 1.0).unwrap();
        assert!((a.energy() - 1.0).abs() < 1e-12);
        assert!(a.iter().zip(b.iter()).all(|(x, y)| (x - y).norm() < 1e-15));
        let z = TimeVector::zeros(&GridConfig::baseline(), SamplingMode::Nyquist);
        assert!(matches!(
            normalize_energy(&z, 1.0),
            Err(IsacError::ZeroEnergy)
        ));
    }
}
