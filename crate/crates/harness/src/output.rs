//! CSV row schemas. The first column of every table names its schema and
//! version so downstream scripts can detect layout changes.

use std::path::Path;

use serde::Serialize;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub schema: &'static str,
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub trial: u64,
    pub mode: &'static str,
    /// `zero`, `radar`, `comm`, `custom`, or `ideal` for s₀ itself.
    pub waveform: String,
    pub rho: Option<f64>,
    pub papr_constraint_db: Option<f64>,
    pub esn0_db: f64,
    pub mui: f64,
    pub ser: f64,
    pub sum_rate: f64,
    pub islr_db: f64,
    /// Smallest echo SNR over the target angles; per-angle values go to the
    /// rSNR table.
    pub rsnr_min_db: f64,
    pub pattern_mismatch: f64,
    pub papr_measured_db: f64,
    pub objective: Option<f64>,
    pub comm_term: Option<f64>,
    pub radar_term: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    #[serde(skip)]
    pub wall_time_s: f64,
}

pub const RESULT_SCHEMA: &str = "result.v1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub schema: &'static str,
    pub experiment: String,
    pub mode: &'static str,
    pub label: String,
    pub iter: usize,
    pub objective: f64,
    pub comm_term: f64,
    pub radar_term: f64,
    pub lagrangian: f64,
    pub res_y: f64,
    pub res_v: f64,
}

pub const TRACE_SCHEMA: &str = "trace.v1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RsnrRow {
    pub schema: &'static str,
    pub experiment: String,
    pub mode: &'static str,
    pub waveform: String,
    pub rho: Option<f64>,
    pub papr_constraint_db: Option<f64>,
    pub target_deg: f64,
    pub rsnr_db: f64,
}

pub const RSNR_SCHEMA: &str = "rsnr.v1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternRow {
    pub schema: &'static str,
    pub experiment: String,
    pub mode: &'static str,
    pub waveform: String,
    pub rho: Option<f64>,
    pub papr_constraint_db: Option<f64>,
    pub theta_deg: f64,
    pub pattern: f64,
    pub ideal: f64,
}

pub const PATTERN_SCHEMA: &str = "beampattern.v1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmbiguityRow {
    pub schema: &'static str,
    pub experiment: String,
    pub mode: &'static str,
    pub waveform: String,
    pub rho: Option<f64>,
    pub papr_constraint_db: Option<f64>,
    pub target_deg: f64,
    pub delay: isize,
    /// χ relative to its zero-delay peak.
    pub chi_db: f64,
}

pub const AMBIGUITY_SCHEMA: &str = "ambiguity.v1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub schema: &'static str,
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub mode: &'static str,
    pub rho: f64,
    pub papr_constraint_db: f64,
    pub esn0_db: f64,
    pub n_trials: usize,
    pub ser_mean: f64,
    pub ser_se: f64,
    pub sum_rate_mean: f64,
    pub sum_rate_se: f64,
    pub mui_mean: f64,
    pub islr_db_mean: f64,
}

pub const AGGREGATE_SCHEMA: &str = "montecarlo.v1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RsnrAggregateRow {
    pub schema: &'static str,
    pub mode: &'static str,
    pub rho: f64,
    pub papr_constraint_db: f64,
    pub target_deg: f64,
    pub n_trials: usize,
    /// 10·log10 of the mean linear echo SNR.
    pub rsnr_db: f64,
    pub rsnr_se_db: f64,
}

pub const RSNR_AGGREGATE_SCHEMA: &str = "montecarlo_rsnr.v1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub experiment: String,
    pub mode: &'static str,
    pub waveform: String,
    pub rho: Option<f64>,
    pub papr_constraint_db: Option<f64>,
    pub trial: u64,
    pub wall_time_s: f64,
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => HarnessError::io(path, io),
        other => HarnessError::Format(format!("{other:?}")),
    })?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}
