//! Experiment configuration: a flat TOML file at the boundary of the
//! library. Gains and powers are specified in dB / dBm here and converted
//! to linear scale exactly once, when a [`crate::channel::SystemParams`] is
//! built for a sweep point.
//!
//! # Grammar
//!
//! ```toml
//! sweep = "power"            # "power" | "bd-count" | "rs-vs-rbd" | "single"
//! methods = ["mrc", "corr-eig", "sdr"]
//! n_realizations = 1
//! mc_trials = 10000
//! seed = 1
//! output_path = "out.csv"
//! j_list = [0, 1, 2]         # required for sweep = "bd-count"
//! gamma_db = [10.0, 15.0]    # "rs-vs-rbd" only; omitted -> default choice
//! rbd_grid = [0.0, 0.05]     # "rs-vs-rbd" only; omitted -> default grid
//!
//! # All [system] keys are optional; omitted ones use the defaults shown.
//! [system]
//! p_dbm = [0.0]              # transmit power grid, dBm
//! alpha = 1.0
//! sigma2_dbm = -110.0        # noise power, dBm
//! k = 128
//! m = 4
//! j = 200                    # BD count (fixed sweeps); "bd-count" uses j_list
//! beta_hd_db = -120.0
//! beta_h_db = -110.0
//! beta_g_db = -20.0
//! ```

use serde::{Deserialize, Serialize};

use crate::beamforming::BeamformerMethod;
use crate::channel::{BdSymbolModel, SystemParams};
use crate::error::{Error, Result};

/// `10^(db/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// dBm to watts: `10^((dbm - 30)/10)`.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Watts to dBm, the exact inverse of [`dbm_to_watts`].
pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// Which experiment a config drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sweep {
    /// Transmit power sweep on one fixed channel realization.
    Power,
    /// BD-count sweep averaged over realizations.
    BdCount,
    /// Asymptotic primary-vs-secondary rate curve.
    RsVsRbd,
    /// One realization, one power point, all requested methods.
    Single,
}

/// dB-valued system parameters as they appear in config files. Omitted
/// fields fall back to the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// Transmit power grid, dBm. Sweeps other than `power` use the first
    /// entry.
    pub p_dbm: Vec<f64>,
    pub alpha: f64,
    pub sigma2_dbm: f64,
    pub k: u32,
    pub m: usize,
    /// BD count for fixed-J sweeps.
    pub j: usize,
    pub beta_hd_db: f64,
    pub beta_h_db: f64,
    pub beta_g_db: f64,
    #[serde(default)]
    pub bd_symbol_model: BdSymbolModel,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            p_dbm: vec![0.0],
            alpha: 1.0,
            sigma2_dbm: -110.0,
            k: 128,
            m: 4,
            j: 200,
            beta_hd_db: -120.0,
            beta_h_db: -110.0,
            beta_g_db: -20.0,
            bd_symbol_model: BdSymbolModel::Cscg,
        }
    }
}

impl SystemConfig {
    /// Linear-scale parameters at one power point and BD count.
    pub fn to_params(&self, p_dbm: f64, j: usize) -> SystemParams {
        SystemParams {
            p: dbm_to_watts(p_dbm),
            alpha: self.alpha,
            sigma2: dbm_to_watts(self.sigma2_dbm),
            k: self.k,
            m: self.m,
            j,
            beta_hd: db_to_linear(self.beta_hd_db),
            beta_h: db_to_linear(self.beta_h_db),
            beta_g: db_to_linear(self.beta_g_db),
            bd_symbol_model: self.bd_symbol_model,
        }
    }
}

fn default_methods() -> Vec<String> {
    vec!["mrc".into(), "corr-eig".into(), "sdr".into()]
}

fn one() -> u64 {
    1
}

fn default_trials() -> u64 {
    10_000
}

/// A parsed experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub sweep: Sweep,
    #[serde(default = "default_methods")]
    pub methods: Vec<String>,
    #[serde(default = "one")]
    pub n_realizations: u64,
    #[serde(default = "default_trials")]
    pub mc_trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
    #[serde(default)]
    pub system: SystemConfig,
    /// BD counts for the `bd-count` sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_list: Option<Vec<u64>>,
    /// Direct-link SNR values for the `rs-vs-rbd` curve, dB.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_db: Option<Vec<f64>>,
    /// Secondary-rate grid for the `rs-vs-rbd` curve, bps/Hz.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rbd_grid: Option<Vec<f64>>,
}

impl ExperimentConfig {
    /// A ready-to-run config for the given sweep with the standard
    /// simulation defaults.
    pub fn default_for(sweep: Sweep) -> Self {
        let mut cfg = Self {
            sweep,
            methods: default_methods(),
            n_realizations: 1,
            mc_trials: default_trials(),
            seed: 0,
            output_path: None,
            system: SystemConfig::default(),
            j_list: None,
            gamma_db: None,
            rbd_grid: None,
        };
        match sweep {
            Sweep::Power => {
                cfg.system.p_dbm = (0..=8).map(|i| -10.0 + 5.0 * i as f64).collect();
                cfg.system.j = 200;
            }
            Sweep::BdCount => {
                cfg.methods = vec!["corr-eig".into()];
                cfg.n_realizations = 1000;
                cfg.j_list = Some(vec![0, 1, 2, 5, 10, 20, 50, 100, 200, 350, 500]);
            }
            Sweep::RsVsRbd => {}
            Sweep::Single => {
                cfg.system.p_dbm = vec![0.0];
            }
        }
        cfg
    }

    /// Parse a requested method list like `mrc,corr-eig,sdr`.
    pub fn parse_methods(&self) -> Result<Vec<BeamformerMethod>> {
        self.methods
            .iter()
            .map(|s| match s.trim() {
                "mrc" => Ok(BeamformerMethod::Mrc),
                "corr-eig" => Ok(BeamformerMethod::CorrelationEig),
                "sdr" => Ok(BeamformerMethod::Sdr),
                other => Err(Error::Config(format!(
                    "unknown method '{other}' (expected mrc, corr-eig, sdr)"
                ))),
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_realizations < 1 {
            return Err(Error::Config("n_realizations must be >= 1".into()));
        }
        if self.mc_trials < 1 {
            return Err(Error::Config("mc_trials must be >= 1".into()));
        }
        if self.system.p_dbm.is_empty() {
            return Err(Error::Config("system.p_dbm must not be empty".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("methods must not be empty".into()));
        }
        self.parse_methods()?;
        match self.sweep {
            Sweep::BdCount => {
                let list = self
                    .j_list
                    .as_ref()
                    .ok_or_else(|| Error::Config("sweep 'bd-count' requires j_list".into()))?;
                if list.is_empty() {
                    return Err(Error::Config("j_list must not be empty".into()));
                }
            }
            Sweep::RsVsRbd => {
                if let Some(g) = &self.gamma_db {
                    if g.is_empty() {
                        return Err(Error::Config("gamma_db must not be empty".into()));
                    }
                }
                if let Some(r) = &self.rbd_grid {
                    if r.iter().any(|&x| x < 0.0) {
                        return Err(Error::Config("rbd_grid values must be >= 0".into()));
                    }
                }
            }
            Sweep::Power | Sweep::Single => {}
        }
        // Reject parameters that would fail downstream, with config context.
        self.system
            .to_params(self.system.p_dbm[0], self.system.j)
            .validate()
            .map_err(|e| Error::Config(format!("system section: {e}")))?;
        Ok(())
    }

    /// Serialize to TOML.
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Parse a config from TOML text. Errors carry the line/column and field
/// context reported by the parser.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig =
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Load and validate a config file.
pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
