//! Seeded experiment drivers. Sweep points and trials run on the rayon pool;
//! results are gathered in input order, so output never depends on scheduling.

use std::path::Path;

use isac_core::admm::Init;
use isac_core::radar_metrics::{ambiguity, beam_pattern_time, RadarScene};
use isac_core::{GridConfig, SamplingMode, TimeVector};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::*;
use crate::pipeline::{
    design_ideal, design_isac, draw_trial, evaluate, link_curve, mode_name, radar_scene,
    IdealRadar, IsacDesign, Metrics, TrialDraw,
};

/// Every table an experiment can emit. Empty tables are not written.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tables {
    pub results: Vec<ResultRow>,
    pub traces: Vec<TraceRow>,
    pub rsnr: Vec<RsnrRow>,
    pub patterns: Vec<PatternRow>,
    pub ambiguity: Vec<AmbiguityRow>,
    pub timings: Vec<TimingRow>,
}

impl Tables {
    fn extend(&mut self, other: Tables) {
        self.results.extend(other.results);
        self.traces.extend(other.traces);
        self.rsnr.extend(other.rsnr);
        self.patterns.extend(other.patterns);
        self.ambiguity.extend(other.ambiguity);
        self.timings.extend(other.timings);
    }

    /// Writes `<prefix>_<table>.csv` into `dir`.
    pub fn write(&self, dir: &Path, prefix: &str) -> Result<Vec<std::path::PathBuf>> {
        ensure_dir(dir)?;
        let mut written = Vec::new();
        let mut put = |name: &str, f: &dyn Fn(&Path) -> Result<()>, empty: bool| -> Result<()> {
            if !empty {
                let p = dir.join(format!("{prefix}_{name}.csv"));
                f(&p)?;
                written.push(p);
            }
            Ok(())
        };
        put(
            "results",
            &|p| write_csv(p, &self.results),
            self.results.is_empty(),
        )?;
        put(
            "trace",
            &|p| write_csv(p, &self.traces),
            self.traces.is_empty(),
        )?;
        put("rsnr", &|p| write_csv(p, &self.rsnr), self.rsnr.is_empty())?;
        put(
            "beampattern",
            &|p| write_csv(p, &self.patterns),
            self.patterns.is_empty(),
        )?;
        put(
            "ambiguity",
            &|p| write_csv(p, &self.ambiguity),
            self.ambiguity.is_empty(),
        )?;
        put(
            "timing",
            &|p| write_csv(p, &self.timings),
            self.timings.is_empty(),
        )?;
        Ok(written)
    }
}

/// Labels attached to one evaluated waveform.
struct Point<'a> {
    experiment: &'a str,
    mode: SamplingMode,
    waveform: &'a str,
    rho: Option<f64>,
    papr_db: Option<f64>,
    trial: u64,
}

fn result_row(cfg: &ExperimentConfig, p: &Point, m: &Metrics, d: Option<&IsacDesign>) -> ResultRow {
    let last = d.and_then(|d| d.output.trace.last());
    ResultRow {
        schema: RESULT_SCHEMA,
        experiment: p.experiment.into(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        trial: p.trial,
        mode: mode_name(p.mode),
        waveform: p.waveform.into(),
        rho: p.rho,
        papr_constraint_db: p.papr_db,
        esn0_db: cfg.esn0_db,
        mui: m.mui,
        ser: m.ser,
        sum_rate: m.sum_rate,
        islr_db: m.islr_db,
        rsnr_min_db: m.rsnr_db.iter().copied().fold(f64::INFINITY, f64::min),
        pattern_mismatch: m.pattern_mismatch,
        papr_measured_db: m.papr_db,
        objective: last.map(|r| r.objective),
        comm_term: last.map(|r| r.comm_term),
        radar_term: last.map(|r| r.radar_term),
        iterations: last.map(|r| r.iter),
        converged: d.map(|d| d.output.converged),
        wall_time_s: d.map_or(0.0, |d| d.wall_time_s),
    }
}

fn trace_rows(p: &Point, label: String, d: &IsacDesign) -> Vec<TraceRow> {
    d.output
        .trace
        .records
        .iter()
        .map(|r| TraceRow {
            schema: TRACE_SCHEMA,
            experiment: p.experiment.into(),
            mode: mode_name(p.mode),
            label: label.clone(),
            iter: r.iter,
            objective: r.objective,
            comm_term: r.comm_term,
            radar_term: r.radar_term,
            lagrangian: r.lagrangian,
            res_y: r.res_y,
            res_v: r.res_v,
        })
        .collect()
}

/// Metrics, rSNR, beampattern and zero-Doppler ambiguity cut of one waveform.
fn describe(
    cfg: &ExperimentConfig,
    scene: &RadarScene,
    draw: &TrialDraw,
    grid: &GridConfig,
    p: &Point,
    s: &TimeVector,
    d: Option<&IsacDesign>,
) -> Result<Tables> {
    let m = evaluate(cfg, scene, grid, draw, s, cfg.esn0_db)?;
    let rsnr = scene
        .target_angles
        .iter()
        .zip(&m.rsnr_db)
        .map(|(th, r)| RsnrRow {
            schema: RSNR_SCHEMA,
            experiment: p.experiment.into(),
            mode: mode_name(p.mode),
            waveform: p.waveform.into(),
            rho: p.rho,
            papr_constraint_db: p.papr_db,
            target_deg: th.to_degrees(),
            rsnr_db: *r,
        })
        .collect();
    let b = beam_pattern_time(s, &scene.pattern_grid, grid)?;
    let patterns = scene
        .pattern_grid
        .iter()
        .zip(&b)
        .zip(&scene.ideal_pattern)
        .map(|((th, b), d)| PatternRow {
            schema: PATTERN_SCHEMA,
            experiment: p.experiment.into(),
            mode: mode_name(p.mode),
            waveform: p.waveform.into(),
            rho: p.rho,
            papr_constraint_db: p.papr_db,
            theta_deg: th.to_degrees(),
            pattern: *b,
            ideal: *d,
        })
        .collect();
    let max_k = grid.cp_samples(s.mode) as isize;
    let delays: Vec<isize> = (-max_k..=max_k).collect();
    let mut amb = Vec::new();
    for &th in &scene.target_angles {
        let surf = ambiguity(s, th, &delays, &[0.0], grid)?;
        for (ki, k) in delays.iter().enumerate() {
            amb.push(AmbiguityRow {
                schema: AMBIGUITY_SCHEMA,
                experiment: p.experiment.into(),
                mode: mode_name(p.mode),
                waveform: p.waveform.into(),
                rho: p.rho,
                papr_constraint_db: p.papr_db,
                target_deg: th.to_degrees(),
                delay: *k,
                chi_db: 10.0 * (surf.get(ki, 0) / surf.peak).max(1e-30).log10(),
            });
        }
    }
    Ok(Tables {
        results: vec![result_row(cfg, p, &m, d)],
        traces: Vec::new(),
        rsnr,
        patterns,
        ambiguity: amb,
        timings: d
            .map(|d| TimingRow {
                experiment: p.experiment.into(),
                mode: mode_name(p.mode),
                waveform: p.waveform.into(),
                rho: p.rho,
                papr_constraint_db: p.papr_db,
                trial: p.trial,
                wall_time_s: d.wall_time_s,
            })
            .into_iter()
            .collect(),
    })
}

/// Metrics of an arbitrary waveform against the trial-0 draw of `cfg`.
pub fn evaluate_waveform(cfg: &ExperimentConfig, s: &TimeVector) -> Result<Tables> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    s.check(&grid)?;
    let scene = radar_scene(cfg, s.mode)?;
    let draw = draw_trial(cfg, 0)?;
    let p = Point {
        experiment: "evaluate",
        mode: s.mode,
        waveform: "custom",
        rho: None,
        papr_db: None,
        trial: 0,
    };
    describe(cfg, &scene, &draw, &grid, &p, s, None)
}

/// Zero, radar and communication starting points on one problem instance.
pub fn run_init_study(cfg: &ExperimentConfig) -> Result<Tables> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let mode = cfg.mode();
    let ideal = design_ideal(cfg, mode)?;
    let draw = draw_trial(cfg, 0)?;
    let inits = [Init::Zero, Init::Radar, Init::Comm];
    let designs = inits
        .par_iter()
        .map(|init| design_isac(cfg, &ideal, &draw, cfg.rho, cfg.papr_db, init))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Tables::default();
    for d in &designs {
        let p = Point {
            experiment: "init-study",
            mode,
            waveform: d.init,
            rho: Some(cfg.rho),
            papr_db: Some(cfg.papr_db),
            trial: 0,
        };
        let mut t = describe(cfg, &ideal.scene, &draw, &grid, &p, &d.output.s, Some(d))?;
        t.traces = trace_rows(&p, d.init.into(), d);
        out.extend(t);
    }
    Ok(out)
}

fn sweep(
    cfg: &ExperimentConfig,
    experiment: &str,
    points: &[(f64, f64)],
    with_traces: bool,
    modes: &[SamplingMode],
) -> Result<Tables> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let draw = draw_trial(cfg, 0)?;
    let mut out = Tables::default();
    for &mode in modes {
        let ideal = design_ideal(cfg, mode)?;
        let p = Point {
            experiment,
            mode,
            waveform: "ideal",
            rho: None,
            papr_db: None,
            trial: 0,
        };
        out.extend(describe(
            cfg,
            &ideal.scene,
            &draw,
            &grid,
            &p,
            &ideal.s0,
            None,
        )?);
        let tables = points
            .par_iter()
            .map(|&(rho, papr_db)| {
                let d = design_isac(cfg, &ideal, &draw, rho, papr_db, &Init::Radar)?;
                let p = Point {
                    experiment,
                    mode,
                    waveform: "radar",
                    rho: Some(rho),
                    papr_db: Some(papr_db),
                    trial: 0,
                };
                let mut t = describe(cfg, &ideal.scene, &draw, &grid, &p, &d.output.s, Some(&d))?;
                if with_traces {
                    t.traces = trace_rows(&p, format!("rho={rho} papr={papr_db}dB"), &d);
                }
                Ok(t)
            })
            .collect::<Result<Vec<_>>>()?;
        tables.into_iter().for_each(|t| out.extend(t));
    }
    Ok(out)
}

pub const BOTH_MODES: [SamplingMode; 2] = [SamplingMode::Nyquist, SamplingMode::Oversampled];

/// One radar-initialized design per ρ at the configured PAPR cap.
pub fn run_rho_sweep(cfg: &ExperimentConfig, modes: &[SamplingMode]) -> Result<Tables> {
    let points: Vec<_> = cfg.rho_grid.iter().map(|&r| (r, cfg.papr_db)).collect();
    sweep(cfg, "rho-sweep", &points, false, modes)
}

/// One radar-initialized design per PAPR cap at the configured ρ, with traces.
pub fn run_papr_sweep(cfg: &ExperimentConfig, modes: &[SamplingMode]) -> Result<Tables> {
    let points: Vec<_> = cfg.papr_grid_db.iter().map(|&c| (cfg.rho, c)).collect();
    sweep(cfg, "papr-sweep", &points, true, modes)
}

/// Per-trial outcome at one ρ.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial: u64,
    pub rho: f64,
    /// (Es/N0 dB, SER, sum rate) per grid point.
    pub link: Vec<(f64, f64, f64)>,
    pub mui: f64,
    pub islr_db: f64,
    /// Linear echo SNR per target.
    pub rsnr: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarlo {
    pub mode: SamplingMode,
    pub trials: Vec<TrialOutcome>,
    pub aggregate: Vec<AggregateRow>,
    pub rsnr: Vec<RsnrAggregateRow>,
}

impl MonteCarlo {
    pub fn write(&self, dir: &Path, prefix: &str) -> Result<Vec<std::path::PathBuf>> {
        ensure_dir(dir)?;
        let a = dir.join(format!("{prefix}_aggregate.csv"));
        let r = dir.join(format!("{prefix}_rsnr.csv"));
        write_csv(&a, &self.aggregate)?;
        write_csv(&r, &self.rsnr)?;
        Ok(vec![a, r])
    }
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn one_trial(
    cfg: &ExperimentConfig,
    ideal: &IdealRadar,
    grid: &GridConfig,
    trial: u64,
) -> Result<Vec<TrialOutcome>> {
    let draw = draw_trial(cfg, trial)?;
    cfg.rho_grid
        .iter()
        .map(|&rho| {
            let d = design_isac(cfg, ideal, &draw, rho, cfg.papr_db, &Init::Radar)?;
            let s = &d.output.s;
            let m = evaluate(cfg, &ideal.scene, grid, &draw, s, cfg.esn0_db)?;
            Ok(TrialOutcome {
                trial,
                rho,
                link: link_curve(cfg, &draw, &d.output.x, &cfg.esn0_grid_db)?,
                mui: m.mui,
                islr_db: m.islr_db,
                rsnr: m.rsnr_db.iter().map(|r| 10f64.powf(r / 10.0)).collect(),
                iterations: d.output.trace.records.len(),
            })
        })
        .collect()
}

/// `n_mc` trials, each with a fresh channel and symbol draw, over ρ ∈
/// `rho_grid` at the configured cap and sampling mode.
pub fn run_montecarlo(cfg: &ExperimentConfig, parallel: bool) -> Result<MonteCarlo> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let mode = cfg.mode();
    let ideal = design_ideal(cfg, mode)?;
    let ids: Vec<u64> = (0..cfg.n_mc as u64).collect();
    let per_trial: Vec<Vec<TrialOutcome>> = if parallel {
        ids.par_iter()
            .map(|&t| one_trial(cfg, &ideal, &grid, t))
            .collect::<Result<_>>()?
    } else {
        ids.iter()
            .map(|&t| one_trial(cfg, &ideal, &grid, t))
            .collect::<Result<_>>()?
    };
    let trials: Vec<TrialOutcome> = per_trial.into_iter().flatten().collect();

    let mut aggregate = Vec::new();
    let mut rsnr = Vec::new();
    for &rho in &cfg.rho_grid {
        let at: Vec<&TrialOutcome> = trials.iter().filter(|t| t.rho == rho).collect();
        let n = at.len();
        let (mui_mean, _) = mean_se(&at.iter().map(|t| t.mui).collect::<Vec<_>>());
        let (islr_mean, _) = mean_se(&at.iter().map(|t| t.islr_db).collect::<Vec<_>>());
        for (ei, &esn0) in cfg.esn0_grid_db.iter().enumerate() {
            let (ser_mean, ser_se) = mean_se(&at.iter().map(|t| t.link[ei].1).collect::<Vec<_>>());
            let (rate_mean, rate_se) =
                mean_se(&at.iter().map(|t| t.link[ei].2).collect::<Vec<_>>());
            aggregate.push(AggregateRow {
                schema: AGGREGATE_SCHEMA,
                experiment: "montecarlo".into(),
                config_hash: cfg.hash(),
                seed: cfg.seed,
                mode: mode_name(mode),
                rho,
                papr_constraint_db: cfg.papr_db,
                esn0_db: esn0,
                n_trials: n,
                ser_mean,
                ser_se,
                sum_rate_mean: rate_mean,
                sum_rate_se: rate_se,
                mui_mean,
                islr_db_mean: islr_mean,
            });
        }
        for (ti, th) in ideal.scene.target_angles.iter().enumerate() {
            let (m, se) = mean_se(&at.iter().map(|t| t.rsnr[ti]).collect::<Vec<_>>());
            rsnr.push(RsnrAggregateRow {
                schema: RSNR_AGGREGATE_SCHEMA,
                mode: mode_name(mode),
                rho,
                papr_constraint_db: cfg.papr_db,
                target_deg: th.to_degrees(),
                n_trials: n,
                rsnr_db: 10.0 * m.log10(),
                rsnr_se_db: 10.0 / std::f64::consts::LN_10 * se / m,
            });
        }
    }
    Ok(MonteCarlo {
        mode,
        trials,
        aggregate,
        rsnr,
    })
}
