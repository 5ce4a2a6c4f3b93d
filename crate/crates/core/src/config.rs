//! Engine configuration file (TOML).
//!
//! ```toml
//! [thresholds]          # alignment zones, mm / degrees
//! working_radius_mm = 20.0
//! working_angle_deg = 30.0
//! target_mm = 2.0
//! target_deg = 1.5
//! transition_mm = 0.5
//! transition_deg = 0.375
//!
//! [mapping]             # see MappingConfig; omitted keys keep defaults
//! endpoint_order = "literal"
//!
//! [synth]               # see SynthConfig
//! sample_rate_hz = 48000
//!
//! [network]
//! osc_listen = "0.0.0.0:9000"
//! osc_out = "127.0.0.1:57120"   # optional parameter/event echo
//! bridge_listen = "127.0.0.1:8765"
//! ingress_queue = 64
//! log_dir = "sessions"
//!
//! [sim]
//! tick_rate_hz = 50.0
//! dwell_s = 0.5
//! ```
//!
//! `SONONAV_PORT` replaces the OSC listen port and `SONONAV_LOG_DIR` the log
//! directory.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fsm::ZoneThresholds;
use crate::mapping::MappingConfig;
use crate::synth::SynthConfig;

pub const PORT_ENV: &str = "SONONAV_PORT";
pub const LOG_DIR_ENV: &str = "SONONAV_LOG_DIR";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub osc_listen: SocketAddr,
    pub osc_out: Option<SocketAddr>,
    pub bridge_listen: SocketAddr,
    /// Capacity of the pose ingress queue; the oldest pose is dropped on overflow.
    pub ingress_queue: usize,
    pub log_dir: PathBuf,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            osc_listen: ([0, 0, 0, 0], 9000).into(),
            osc_out: None,
            bridge_listen: ([127, 0, 0, 1], 8765).into(),
            ingress_queue: 64,
            log_dir: PathBuf::from("sessions"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub tick_rate_hz: f64,
    /// Time the final phase must hold before drilling is declared.
    pub dwell_s: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            tick_rate_hz: 50.0,
            dwell_s: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub thresholds: ZoneThresholds,
    pub mapping: MappingConfig,
    pub synth: SynthConfig,
    pub network: NetworkConfig,
    pub sim: SimConfig,
}

impl EngineConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.thresholds
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.mapping.validate().map_err(ConfigError::Invalid)?;
        self.synth.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.network.ingress_queue == 0 {
            return Err(ConfigError::Invalid("ingress_queue must be > 0".into()));
        }
        if !(self.sim.tick_rate_hz > 0.0 && self.sim.tick_rate_hz.is_finite()) {
            return Err(ConfigError::Invalid("tick_rate_hz must be positive".into()));
        }
        if !(self.sim.dwell_s >= 0.0 && self.sim.dwell_s.is_finite()) {
            return Err(ConfigError::Invalid("dwell_s must be non-negative".into()));
        }
        Ok(())
    }

    /// Applies environment overrides read through `var`.
    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        if let Some(port) = var(PORT_ENV) {
            let port: u16 = port
                .trim()
                .parse()
                .map_err(|_| ConfigError::Invalid(format!("{PORT_ENV}={port:?} is not a port number")))?;
            self.network.osc_listen.set_port(port);
        }
        if let Some(dir) = var(LOG_DIR_ENV) {
            self.network.log_dir = PathBuf::from(dir);
        }
        Ok(())
    }

    pub fn apply_process_env(&mut self) -> Result<(), ConfigError> {
        self.apply_env(|k| std::env::var(k).ok())
    }
}
