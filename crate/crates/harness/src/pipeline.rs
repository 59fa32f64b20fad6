//! Single-design building blocks shared by every experiment: ideal radar
//! design, per-trial random draws, ADMM design and metric evaluation.

use std::time::Instant;

use isac_core::admm::{derive_eps, run_admm, AdmmOutput, Init, IsacProblem};
use isac_core::channel::{sample_rician_taps, ChannelRealization};
use isac_core::comm_metrics::{
    empirical_ser, mui_energy, noise_std_from_esn0_db, papr_time, sum_rate, ConstellationSymbols,
};
use isac_core::ideal_waveform::{
    lbfgs_minimize, normalize_energy, IdealDesign, IdealObjectiveSpec,
};
use isac_core::operators::Synthesis;
use isac_core::radar_metrics::{
    delay_doppler_set, echo_snr, islr, mean_sample_power, pattern_mismatch, MaskSpec, RadarScene,
};
use isac_core::{GridConfig, SamplingMode, TimeVector};
use num_complex::Complex64;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::seeds::derive_seed;

pub fn mode_name(mode: SamplingMode) -> &'static str {
    match mode {
        SamplingMode::Nyquist => "nyquist",
        SamplingMode::Oversampled => "oversampled",
    }
}

/// Target mask and delay region for `mode`.
pub fn radar_scene(cfg: &ExperimentConfig, mode: SamplingMode) -> Result<RadarScene> {
    let grid = cfg.grid()?;
    let mask = MaskSpec {
        width_deg: cfg.mask_width_deg,
        ..MaskSpec::default()
    };
    Ok(RadarScene::rectangular(
        &cfg.target_angles(),
        &mask,
        mean_sample_power(&grid, mode, cfg.energy_total()?),
        delay_doppler_set(grid.cp_samples(mode), &[0.0]),
    )?)
}

/// The ideal radar waveform s₀ for one sampling mode.
#[derive(Debug, Clone)]
pub struct IdealRadar {
    pub mode: SamplingMode,
    pub scene: RadarScene,
    /// Normalized to the effective energy of the feasible set.
    pub s0: TimeVector,
    pub design: IdealDesign,
    pub seed: u64,
}

pub fn design_ideal(cfg: &ExperimentConfig, mode: SamplingMode) -> Result<IdealRadar> {
    let grid = cfg.grid()?;
    let scene = radar_scene(cfg, mode)?;
    let seed = derive_seed(cfg.seed, "ideal", mode as u64);
    let spec = IdealObjectiveSpec::new(scene.clone(), grid, mode);
    let design = lbfgs_minimize(&spec, &cfg.lbfgs_config(), None, seed)?;
    let target = grid.effective_fraction() * cfg.energy_total()?;
    let s0 = normalize_energy(&design.s, target)?;
    Ok(IdealRadar {
        mode,
        scene,
        s0,
        design,
        seed,
    })
}

/// Channel and data symbols for one Monte Carlo trial.
#[derive(Debug, Clone)]
pub struct TrialDraw {
    pub trial: u64,
    pub channel: ChannelRealization,
    pub s_d: ConstellationSymbols,
    pub noise_seed: u64,
}

pub fn draw_trial(cfg: &ExperimentConfig, trial: u64) -> Result<TrialDraw> {
    let grid = cfg.grid()?;
    let channel = sample_rician_taps(
        &cfg.channel_config(),
        &grid,
        derive_seed(cfg.seed, "channel", trial),
    )?;
    let s_d = ConstellationSymbols::random(
        grid.n_sub,
        cfg.n_users,
        derive_seed(cfg.seed, "symbols", trial),
    );
    Ok(TrialDraw {
        trial,
        channel,
        s_d,
        noise_seed: derive_seed(cfg.seed, "noise", trial),
    })
}

pub fn build_problem(
    cfg: &ExperimentConfig,
    ideal: &IdealRadar,
    draw: &TrialDraw,
    rho: f64,
    papr_db: f64,
) -> Result<IsacProblem> {
    let grid = cfg.grid()?;
    let energy_total = cfg.energy_total()?;
    let problem = IsacProblem {
        grid,
        mode: ideal.mode,
        channel: draw.channel.clone(),
        s_d: draw.s_d.clone(),
        s0: ideal.s0.clone(),
        rho,
        eps: derive_eps(papr_db, &grid, ideal.mode, energy_total)?,
        energy_total,
    };
    problem.validate()?;
    Ok(problem)
}

#[derive(Debug, Clone)]
pub struct IsacDesign {
    pub problem: IsacProblem,
    pub output: AdmmOutput,
    pub rho: f64,
    pub papr_db: f64,
    pub init: &'static str,
    pub wall_time_s: f64,
}

pub fn design_isac(
    cfg: &ExperimentConfig,
    ideal: &IdealRadar,
    draw: &TrialDraw,
    rho: f64,
    papr_db: f64,
    init: &Init,
) -> Result<IsacDesign> {
    let start = Instant::now();
    let problem = build_problem(cfg, ideal, draw, rho, papr_db)?;
    let output = run_admm(&problem, init, &cfg.admm_options())?;
    Ok(IsacDesign {
        problem,
        output,
        rho,
        papr_db,
        init: init.name(),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Radar and link metrics of one waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub mui: f64,
    pub ser: f64,
    pub sum_rate: f64,
    pub islr_db: f64,
    /// Echo SNR toward each target angle, in target order.
    pub rsnr_db: Vec<f64>,
    pub pattern_mismatch: f64,
    pub papr_db: f64,
}

/// Metrics of the time-domain waveform `s`. The users see the subcarrier
/// symbols Bᴴs; PAPR is measured on `s` itself.
pub fn evaluate(
    cfg: &ExperimentConfig,
    scene: &RadarScene,
    grid: &GridConfig,
    draw: &TrialDraw,
    s: &TimeVector,
    esn0_db: f64,
) -> Result<Metrics> {
    let x = Synthesis::for_mode(grid, s.mode).analyze(s)?;
    let noise_std = noise_std_from_esn0_db(esn0_db);
    let lon = 10f64.powf(cfg.loss_over_noise_db / 10.0);
    Ok(Metrics {
        mui: mui_energy(&draw.channel, &x, &draw.s_d)?,
        ser: empirical_ser(
            &draw.channel,
            &x,
            &draw.s_d,
            noise_std,
            cfg.ser_trials,
            draw.noise_seed,
        )?,
        sum_rate: sum_rate(&draw.channel, &x, &draw.s_d, noise_std)?,
        islr_db: islr(s, scene, grid)?,
        rsnr_db: scene
            .target_angles
            .iter()
            .map(|&th| echo_snr(s, th, lon, grid))
            .collect::<isac_core::Result<_>>()?,
        pattern_mismatch: pattern_mismatch(s, scene, grid)?,
        papr_db: papr_time(s, grid.n_tx)?.max_db,
    })
}

/// SER and sum rate of the subcarrier symbols `x` at each Es/N0 point.
pub fn link_curve(
    cfg: &ExperimentConfig,
    draw: &TrialDraw,
    x: &[Complex64],
    esn0_grid_db: &[f64],
) -> Result<Vec<(f64, f64, f64)>> {
    esn0_grid_db
        .iter()
        .map(|&e| {
            let n = noise_std_from_esn0_db(e);
            Ok((
                e,
                empirical_ser(
                    &draw.channel,
                    x,
                    &draw.s_d,
                    n,
                    cfg.ser_trials,
                    draw.noise_seed,
                )?,
                sum_rate(&draw.channel, x, &draw.s_d, n)?,
            ))
        })
        .collect()
}
