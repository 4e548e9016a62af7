//! Run configuration: a TOML file merged with command-line flags. Flags win.
//!
//! ```toml
//! seed = 7
//! out_dir = "runs/failure"
//!
//! [simulate]
//! topology = "paper16"      # builtin name or path to a topology file
//! scenario = "paper-failure" # canned name or path to a JSON scenario
//! duration_s = 230400.0
//!
//! [filter]
//! monitor = "rcs1"
//! origin = "abr1"           # router name or dotted quad
//! ls_types = [1]
//! include_acks = false
//! bin_s = 10
//! t0_s = 0.0
//! t1_s = 230400.0
//! topology = "paper16"      # resolves router names in `origin`
//!
//! [params]
//! tau_max = 20
//! epsilon = 0.2
//!
//! [detector]
//! window_bins = 200
//! baseline_bins = 60
//! k_mad = 6.0
//! measures = ["rr", "det", "w_entr"]
//!
//! [detector.embed]
//! tau = 1
//! m = 2
//! epsilon = 0.2
//! ```

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ospf_rqa::detector::DetectorConfig;
use ospf_rqa::params::ParamSettings;
use serde::{Deserialize, Serialize};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "OSPF_RQA_OUT";
pub const DEFAULT_OUT_DIR: &str = "ospf-rqa-out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    pub simulate: SimulateConfig,
    pub filter: FilterConfig,
    pub params: ParamSettings,
    pub detector: DetectorConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            out_dir: None,
            simulate: SimulateConfig::default(),
            filter: FilterConfig::default(),
            params: ParamSettings::default(),
            detector: DetectorConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub topology: String,
    pub scenario: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            topology: "paper16".into(),
            scenario: "quiet".into(),
            duration_s: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monitor: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin: Option<String>,
    pub ls_types: Vec<u8>,
    pub include_acks: bool,
    pub bin_s: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t0_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t1_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topology: Option<String>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            monitor: None,
            origin: None,
            ls_types: Vec::new(),
            include_acks: false,
            bin_s: 10,
            t0_s: None,
            t1_s: None,
            topology: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<RunConfig> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).context("serializing config")
    }

    /// `--out` flag, then the config file, then the environment, then the
    /// built-in default.
    pub fn resolve_out_dir(&mut self, flag: Option<PathBuf>) -> PathBuf {
        let dir = flag
            .or_else(|| self.out_dir.clone())
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        self.out_dir = Some(dir.clone());
        dir
    }
}
