use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use isac_core::admm::Init;
use isac_core::SamplingMode;
use isac_harness::experiments::{
    evaluate_waveform, run_init_study, run_montecarlo, run_papr_sweep, run_rho_sweep, Tables,
    BOTH_MODES,
};
use isac_harness::output::{ensure_dir, write_csv, TRACE_SCHEMA};
use isac_harness::pipeline::{design_ideal, design_isac, draw_trial, mode_name};
use isac_harness::{cwf, ExperimentConfig, HarnessError, Result};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "isac",
    version,
    about = "PAPR-constrained ISAC waveform design experiments"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration; omitted keys take the baseline defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Design and measure on the oversampled grid.
    #[arg(long, global = true)]
    oversample: bool,
    /// One value, or a comma-separated grid for sweeps.
    #[arg(long, global = true, value_delimiter = ',')]
    rho: Vec<f64>,
    /// One cap in dB, or a comma-separated grid for sweeps.
    #[arg(long = "papr-db", global = true, value_delimiter = ',')]
    papr_db: Vec<f64>,
    #[arg(long, global = true)]
    eta: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Zero,
    Radar,
    Comm,
}

#[derive(Clone, Copy, ValueEnum)]
enum Modes {
    Nyquist,
    Oversampled,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// L-BFGS ideal radar waveform; writes s0.cwf and ideal_trace.csv.
    DesignIdeal,
    /// One ADMM design on the trial-0 channel; writes isac.cwf and CSVs.
    DesignIsac {
        /// Reference waveform; designed from scratch when omitted.
        #[arg(long)]
        s0: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "radar")]
        init: InitArg,
    },
    /// Radar and link metrics of a stored waveform.
    Evaluate {
        #[arg(long)]
        waveform: PathBuf,
    },
    /// Zero / radar / communication starting points on one instance.
    InitStudy,
    /// Designs over the ρ grid.
    RhoSweep {
        #[arg(long, value_enum, default_value = "both")]
        modes: Modes,
    },
    /// Designs over the PAPR-cap grid.
    PaprSweep {
        #[arg(long, value_enum, default_value = "both")]
        modes: Modes,
    },
    /// Averaged SER, sum rate and echo SNR over n_mc channel draws.
    Montecarlo {
        #[arg(long)]
        n_mc: Option<usize>,
    },
}

fn load_config(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.output_dir = o.clone();
    }
    if c.oversample {
        cfg.oversample = true;
    }
    if !c.rho.is_empty() {
        cfg.rho_grid = c.rho.clone();
        cfg.rho = c.rho[0];
    }
    if !c.papr_db.is_empty() {
        cfg.papr_grid_db = c.papr_db.clone();
        cfg.papr_db = c.papr_db[0];
    }
    if c.eta.is_some() {
        cfg.eta = c.eta;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn single(values: &[f64], flag: &str) -> Result<()> {
    if values.len() > 1 {
        return Err(HarnessError::Config(format!(
            "{flag} takes a single value for this command"
        )));
    }
    Ok(())
}

fn modes(m: Modes) -> Vec<SamplingMode> {
    match m {
        Modes::Nyquist => vec![SamplingMode::Nyquist],
        Modes::Oversampled => vec![SamplingMode::Oversampled],
        Modes::Both => BOTH_MODES.to_vec(),
    }
}

#[derive(Serialize)]
struct IdealTraceRow {
    schema: &'static str,
    mode: &'static str,
    iter: usize,
    objective: f64,
}

fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    let cfg = load_config(&cli.common)?;
    let out = cfg.output_dir.clone();
    ensure_dir(&out)?;
    let grid = cfg.grid()?;
    match cli.command {
        Command::DesignIdeal => {
            let ideal = design_ideal(&cfg, cfg.mode())?;
            let wf = out.join("s0.cwf");
            cwf::write(&wf, &ideal.s0, &grid)?;
            let rows: Vec<_> = ideal
                .design
                .report
                .history
                .iter()
                .enumerate()
                .map(|(i, v)| IdealTraceRow {
                    schema: "ideal_trace.v1",
                    mode: mode_name(ideal.mode),
                    iter: i,
                    objective: *v,
                })
                .collect();
            let tr = out.join("ideal_trace.csv");
            write_csv(&tr, &rows)?;
            Ok(vec![wf, tr])
        }
        Command::DesignIsac { s0, init } => {
            single(&cli.common.rho, "--rho")?;
            single(&cli.common.papr_db, "--papr-db")?;
            let mut ideal = design_ideal(&cfg, cfg.mode())?;
            if let Some(path) = s0 {
                let (s, g) = cwf::read(&path)?;
                if g != grid || s.mode != cfg.mode() || s.cp_included {
                    return Err(HarnessError::Config(format!(
                        "{} does not match the configured grid and sampling mode",
                        path.display()
                    )));
                }
                ideal.s0 = s;
            }
            let draw = draw_trial(&cfg, 0)?;
            let init = match init {
                InitArg::Zero => Init::Zero,
                InitArg::Radar => Init::Radar,
                InitArg::Comm => Init::Comm,
            };
            let d = design_isac(&cfg, &ideal, &draw, cfg.rho, cfg.papr_db, &init)?;
            let wf = out.join("isac.cwf");
            cwf::write(&wf, &d.output.s, &grid)?;
            let mut tables = evaluate_waveform(&cfg, &d.output.s)?;
            for r in &mut tables.results {
                let last = d.output.trace.last();
                r.experiment = "design-isac".into();
                r.waveform = d.init.into();
                r.rho = Some(d.rho);
                r.papr_constraint_db = Some(d.papr_db);
                r.objective = last.map(|l| l.objective);
                r.comm_term = last.map(|l| l.comm_term);
                r.radar_term = last.map(|l| l.radar_term);
                r.iterations = last.map(|l| l.iter);
                r.converged = Some(d.output.converged);
            }
            tables.traces = d
                .output
                .trace
                .records
                .iter()
                .map(|r| isac_harness::output::TraceRow {
                    schema: TRACE_SCHEMA,
                    experiment: "design-isac".into(),
                    mode: mode_name(cfg.mode()),
                    label: d.init.into(),
                    iter: r.iter,
                    objective: r.objective,
                    comm_term: r.comm_term,
                    radar_term: r.radar_term,
                    lagrangian: r.lagrangian,
                    res_y: r.res_y,
                    res_v: r.res_v,
                })
                .collect();
            let mut files = vec![wf];
            files.extend(tables.write(&out, "design_isac")?);
            Ok(files)
        }
        Command::Evaluate { waveform } => {
            let (s, g) = cwf::read(&waveform)?;
            if g != grid {
                return Err(HarnessError::Config(format!(
                    "{} was written for a different grid",
                    waveform.display()
                )));
            }
            evaluate_waveform(&cfg, &s)?.write(&out, "evaluate")
        }
        Command::InitStudy => write_tables(run_init_study(&cfg)?, &out, "init_study"),
        Command::RhoSweep { modes: m } => {
            write_tables(run_rho_sweep(&cfg, &modes(m))?, &out, "rho_sweep")
        }
        Command::PaprSweep { modes: m } => {
            write_tables(run_papr_sweep(&cfg, &modes(m))?, &out, "papr_sweep")
        }
        Command::Montecarlo { n_mc } => {
            let mut cfg = cfg;
            if let Some(n) = n_mc {
                cfg.n_mc = n;
                cfg.validate()?;
            }
            run_montecarlo(&cfg, true)?.write(&out, "montecarlo")
        }
    }
}

fn write_tables(t: Tables, out: &std::path::Path, prefix: &str) -> Result<Vec<PathBuf>> {
    t.write(out, prefix)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("isac: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
