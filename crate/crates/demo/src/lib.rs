//! Browser front end for the ISAC waveform toolkit.
//!
//! The plain-Rust API ([`Scenario`], [`project_random`]) does the work and is
//! tested natively; the `wasm_bindgen` wrappers only convert to JSON.

use isac_core::admm::{derive_eps, project_feasible, run_admm, AdmmOptions, Init, IsacProblem};
use isac_core::channel::{sample_rician_taps, ChannelConfig, ChannelRealization};
use isac_core::comm_metrics::{
    mui_energy, noise_std_from_esn0_db, papr_time, sum_rate, ConstellationSymbols,
};
use isac_core::ideal_waveform::{
    lbfgs_minimize, normalize_energy, random_init, IdealObjectiveSpec, LbfgsConfig,
};
use isac_core::operators::antenna_select;
use isac_core::radar_metrics::{ambiguity, beam_pattern_time, islr, RadarScene};
use isac_core::{GridConfig, Result, SamplingMode, TimeVector};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const ESN0_DB: f64 = 10.0;
const LBFGS_ITERS: usize = 300;

/// Targets and users at ±`target_deg` on the baseline grid, with s₀ designed
/// and one channel drawn.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub grid: GridConfig,
    pub mode: SamplingMode,
    pub scene: RadarScene,
    pub s0: TimeVector,
    pub channel: ChannelRealization,
    pub s_d: ConstellationSymbols,
    pub energy_total: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Curve {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DesignView {
    pub rho: f64,
    pub papr_db: f64,
    pub iterations: usize,
    pub converged: bool,
    pub eta: f64,
    pub mui: f64,
    pub sum_rate: f64,
    pub islr_db: f64,
    pub papr_measured_db: f64,
    /// Degrees against b(θ) for the design, s₀ and the ideal mask.
    pub pattern_deg: Vec<f64>,
    pub pattern: Vec<f64>,
    pub pattern_s0: Vec<f64>,
    pub pattern_ideal: Vec<f64>,
    /// Zero-Doppler χ in dB relative to its peak, one curve per target.
    pub ambiguity: Vec<Curve>,
    pub objective: Vec<f64>,
    /// |z| of antenna 0 and the amplitude cap √ε.
    pub antenna0: Vec<f64>,
    pub cap: f64,
}

impl Scenario {
    pub fn new(target_deg: f64, oversample: bool, seed: u64) -> Result<Self> {
        let grid = GridConfig::baseline();
        let mode = if oversample {
            SamplingMode::Oversampled
        } else {
            SamplingMode::Nyquist
        };
        let energy_total = grid.unit_effective_energy_total();
        let scene = RadarScene::symmetric(target_deg, &grid, mode, energy_total)?;
        let spec = IdealObjectiveSpec::new(scene.clone(), grid, mode);
        let lb = LbfgsConfig {
            max_iters: LBFGS_ITERS,
            ..LbfgsConfig::default()
        };
        let design = lbfgs_minimize(&spec, &lb, None, seed)?;
        let s0 = normalize_energy(&design.s, grid.effective_fraction() * energy_total)?;
        let los = vec![(-target_deg).to_radians(), target_deg.to_radians()];
        let channel = sample_rician_taps(
            &ChannelConfig::uniform(4, 1.0, los, 0.0),
            &grid,
            seed.wrapping_add(1),
        )?;
        let s_d = ConstellationSymbols::random(grid.n_sub, 2, seed.wrapping_add(2));
        Ok(Self {
            grid,
            mode,
            scene,
            s0,
            channel,
            s_d,
            energy_total,
        })
    }

    pub fn problem(&self, rho: f64, papr_db: f64) -> Result<IsacProblem> {
        let p = IsacProblem {
            grid: self.grid,
            mode: self.mode,
            channel: self.channel.clone(),
            s_d: self.s_d.clone(),
            s0: self.s0.clone(),
            rho,
            eps: derive_eps(papr_db, &self.grid, self.mode, self.energy_total)?,
            energy_total: self.energy_total,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn design(&self, rho: f64, papr_db: f64) -> Result<DesignView> {
        let p = self.problem(rho, papr_db)?;
        let out = run_admm(&p, &Init::Radar, &AdmmOptions::default())?;
        let z = &out.s;
        let deg: Vec<f64> = self
            .scene
            .pattern_grid
            .iter()
            .map(|t| t.to_degrees())
            .collect();
        let l = self.grid.cp_samples(self.mode) as isize;
        let delays: Vec<isize> = (-l..=l).collect();
        let ambiguity = self
            .scene
            .target_angles
            .iter()
            .map(|&th| {
                let a = ambiguity(z, th, &delays, &[0.0], &self.grid)?;
                Ok(Curve {
                    x: delays.iter().map(|&k| k as f64).collect(),
                    y: a.values
                        .iter()
                        .map(|v| 10.0 * (v[0] / a.peak).max(1e-12).log10())
                        .collect(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(DesignView {
            rho,
            papr_db,
            iterations: out.state.iter,
            converged: out.converged,
            eta: out.eta,
            mui: mui_energy(&self.channel, &out.x, &self.s_d)?,
            sum_rate: sum_rate(
                &self.channel,
                &out.x,
                &self.s_d,
                noise_std_from_esn0_db(ESN0_DB),
            )?,
            islr_db: islr(z, &self.scene, &self.grid)?,
            papr_measured_db: papr_time(z, self.grid.n_tx)?.max_db,
            pattern: beam_pattern_time(z, &self.scene.pattern_grid, &self.grid)?,
            pattern_s0: beam_pattern_time(&self.s0, &self.scene.pattern_grid, &self.grid)?,
            pattern_ideal: self.scene.ideal_pattern.clone(),
            pattern_deg: deg,
            ambiguity,
            objective: out.trace.records.iter().map(|r| r.objective).collect(),
            antenna0: antenna_select(z, 0, self.grid.n_tx)?
                .iter()
                .map(|c| c.norm())
                .collect(),
            cap: p.eps.sqrt(),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectionView {
    pub papr_before_db: f64,
    pub papr_after_db: f64,
    /// Antenna-0 magnitudes before and after projection.
    pub before: Vec<f64>,
    pub after: Vec<f64>,
    pub cap: f64,
    /// ‖z − w‖/‖w‖.
    pub distortion: f64,
}

/// Projects a random Gaussian waveform onto the per-antenna energy sphere
/// with peak power capped at `papr_db` above the mean.
pub fn project_random(papr_db: f64, seed: u64) -> Result<ProjectionView> {
    let grid = GridConfig::baseline();
    let mode = SamplingMode::Nyquist;
    let e_t = grid.unit_effective_energy_total();
    let w = random_init(&grid, mode, 1.0, seed);
    let eps = derive_eps(papr_db, &grid, mode, e_t)?;
    let z = project_feasible(&w, grid.n_tx, grid.antenna_energy(e_t), eps)?;
    let mag = |v: &[num_complex::Complex64]| -> Result<Vec<f64>> {
        Ok(antenna_select(v, 0, grid.n_tx)?
            .iter()
            .map(|c| c.norm())
            .collect())
    };
    let num: f64 = z
        .iter()
        .zip(w.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    let den: f64 = w.iter().map(|b| b.norm_sqr()).sum();
    Ok(ProjectionView {
        papr_before_db: papr_time(&w, grid.n_tx)?.max_db,
        papr_after_db: papr_time(&z, grid.n_tx)?.max_db,
        before: mag(&w)?,
        after: mag(&z)?,
        cap: eps.sqrt(),
        distortion: (num / den).sqrt(),
    })
}

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

#[wasm_bindgen]
pub struct Demo {
    scenario: Scenario,
}

#[wasm_bindgen]
impl Demo {
    /// Designs s₀ for targets at ±`target_deg` and draws the user channel.
    #[wasm_bindgen(constructor)]
    pub fn new(target_deg: f64, oversample: bool, seed: u32) -> std::result::Result<Demo, JsValue> {
        Ok(Demo {
            scenario: Scenario::new(target_deg, oversample, seed as u64).map_err(js_err)?,
        })
    }

    /// ADMM design at the given tradeoff and PAPR cap, as JSON.
    pub fn design(&self, rho: f64, papr_db: f64) -> std::result::Result<String, JsValue> {
        let v = self.scenario.design(rho, papr_db).map_err(js_err)?;
        serde_json::to_string(&v).map_err(js_err)
    }
}

/// PAPR projection of a random waveform, as JSON.
#[wasm_bindgen]
pub fn papr_projection(papr_db: f64, seed: u32) -> std::result::Result<String, JsValue> {
    let v = project_random(papr_db, seed as u64).map_err(js_err)?;
    serde_json::to_string(&v).map_err(js_err)
}
