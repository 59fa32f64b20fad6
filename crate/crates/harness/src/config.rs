use std::path::{Path, PathBuf};

use isac_core::admm::AdmmOptions;
use isac_core::channel::ChannelConfig;
use isac_core::ideal_waveform::LbfgsConfig;
use isac_core::{GridConfig, SamplingMode};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

/// Every knob of an experiment run. Field defaults reproduce the baseline
/// scenario; unknown keys in a config file are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub carrier_hz: f64,
    pub subcarrier_spacing_hz: f64,
    pub n_tx: usize,
    pub n_sub: usize,
    pub n_cp: usize,
    pub n_users: usize,
    pub target_angles_deg: Vec<f64>,
    pub os_rate: usize,
    pub n_taps: usize,
    pub rician_k: f64,
    pub n_mc: usize,

    pub oversample: bool,
    pub rho: f64,
    pub rho_grid: Vec<f64>,
    pub papr_db: f64,
    pub papr_grid_db: Vec<f64>,
    pub esn0_db: f64,
    pub esn0_grid_db: Vec<f64>,
    pub loss_over_noise_db: f64,
    pub ser_trials: usize,

    pub eta: Option<f64>,
    pub admm_max_iters: usize,
    pub admm_tol: f64,
    pub lbfgs_max_iters: usize,
    pub mask_width_deg: f64,

    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            carrier_hz: 28e9,
            subcarrier_spacing_hz: 300e3,
            n_tx: 8,
            n_sub: 40,
            n_cp: 32,
            n_users: 2,
            target_angles_deg: vec![-30.0, 30.0],
            os_rate: 2,
            n_taps: 4,
            rician_k: 1.0,
            n_mc: 50,
            oversample: false,
            rho: 0.5,
            rho_grid: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            papr_db: 3.0,
            papr_grid_db: vec![1.0, 2.0, 3.0, 5.0],
            esn0_db: 10.0,
            esn0_grid_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            loss_over_noise_db: 0.0,
            ser_trials: 100,
            eta: None,
            admm_max_iters: 2000,
            admm_tol: 1e-6,
            lbfgs_max_iters: 500,
            mask_width_deg: 10.0,
            seed: 7,
            output_dir: PathBuf::from("out"),
        }
    }
}

fn check(ok: bool, msg: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(HarnessError::Config(msg.into()))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            HarnessError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_toml(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        check(self.n_users >= 1, "n_users must be at least 1")?;
        check(
            self.n_users == self.target_angles_deg.len(),
            "one target angle per user is required (LOS directions follow the targets)",
        )?;
        check(
            self.target_angles_deg.iter().all(|a| a.abs() < 90.0),
            "target angles must lie in (-90, 90) degrees",
        )?;
        check(
            self.n_taps >= 1 && self.n_taps <= self.n_cp + 1,
            "n_taps must lie in 1..=n_cp+1",
        )?;
        check(
            self.rician_k >= 0.0 && self.rician_k.is_finite(),
            "rician_k must be finite and >= 0",
        )?;
        check(self.n_mc >= 1, "n_mc must be at least 1")?;
        let rho_ok = |r: &f64| (0.0..=1.0).contains(r);
        check(
            rho_ok(&self.rho) && self.rho_grid.iter().all(rho_ok),
            "rho values must lie in [0, 1]",
        )?;
        check(!self.rho_grid.is_empty(), "rho_grid is empty")?;
        let cap_ok = |p: &f64| *p >= 0.0 && p.is_finite();
        check(
            cap_ok(&self.papr_db) && self.papr_grid_db.iter().all(cap_ok),
            "PAPR caps must be >= 0 dB",
        )?;
        check(!self.papr_grid_db.is_empty(), "papr_grid_db is empty")?;
        check(!self.esn0_grid_db.is_empty(), "esn0_grid_db is empty")?;
        check(self.ser_trials >= 1, "ser_trials must be at least 1")?;
        check(
            self.eta.is_none_or(|e| e > 0.0 && e.is_finite()),
            "eta must be positive",
        )?;
        check(
            self.admm_max_iters >= 1 && self.admm_tol > 0.0,
            "ADMM limits must be positive",
        )?;
        check(
            self.lbfgs_max_iters >= 1,
            "lbfgs_max_iters must be at least 1",
        )?;
        check(self.mask_width_deg > 0.0, "mask_width_deg must be positive")?;
        Ok(())
    }

    pub fn grid(&self) -> Result<GridConfig> {
        GridConfig::new(self.n_tx, self.n_sub, self.n_cp, self.os_rate)
            .map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn mode(&self) -> SamplingMode {
        if self.oversample {
            SamplingMode::Oversampled
        } else {
            SamplingMode::Nyquist
        }
    }

    pub fn target_angles(&self) -> Vec<f64> {
        self.target_angles_deg
            .iter()
            .map(|d| d.to_radians())
            .collect()
    }

    pub fn channel_config(&self) -> ChannelConfig {
        ChannelConfig::uniform(self.n_taps, self.rician_k, self.target_angles(), 0.0)
    }

    /// Total energy E_t that makes the effective (CP-free) frame energy one.
    pub fn energy_total(&self) -> Result<f64> {
        Ok(self.grid()?.unit_effective_energy_total())
    }

    pub fn admm_options(&self) -> AdmmOptions {
        AdmmOptions {
            eta: self.eta,
            max_iters: self.admm_max_iters,
            tol: self.admm_tol,
            ..AdmmOptions::default()
        }
    }

    pub fn lbfgs_config(&self) -> LbfgsConfig {
        LbfgsConfig {
            max_iters: self.lbfgs_max_iters,
            ..LbfgsConfig::default()
        }
    }

    /// First 16 hex digits of SHA-256 over the canonical JSON of the config,
    /// with the output directory left out.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let json = serde_json::to_string(&c).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
