//! Flat TOML run configuration. Every key is optional; command-line flags
//! override file values and unset keys fall back to derived defaults.
//!
//! ```toml
//! protocol = "cdstirap"
//! omega0 = 1.0
//! width = 1.0
//! tau = 0.7
//! eps = [0.0, 1.0, 1.95]
//! param = "tau"
//! values = [0.0, 0.5, 1.0]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulses::{Direction, Protocol, ProtocolConfig, Spectrum, DEFAULT_TAU_OVER_WIDTH};
use crate::sweep::{SweepParameter, SweepSpec};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub protocol: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_level: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub param: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn render(&self) -> String {
        toml::to_string(self).expect("flat config always serialises")
    }

    /// Every field of `cfg`, explicitly.
    pub fn from_config(cfg: &ProtocolConfig) -> Self {
        ConfigFile {
            protocol: Some(cfg.protocol.name().into()),
            direction: Some(cfg.direction.name().into()),
            omega0: Some(cfg.omega0),
            width: Some(cfg.width),
            tau: Some(cfg.tau),
            eps: Some(cfg.eps.levels().to_vec()),
            phase: Some(cfg.phase),
            t_start: Some(cfg.t_start),
            t_end: Some(cfg.t_end),
            dt: Some(cfg.dt),
            initial_level: Some(cfg.initial_level),
            max_rows: Some(cfg.max_rows),
            param: None,
            values: None,
        }
    }

    pub fn from_sweep(spec: &SweepSpec) -> Self {
        ConfigFile {
            param: Some(spec.parameter.name().into()),
            values: Some(spec.values.clone()),
            ..Self::from_config(&spec.base)
        }
    }

    /// Values set here win over those in `base`.
    pub fn overlay(self, base: ConfigFile) -> ConfigFile {
        ConfigFile {
            protocol: self.protocol.or(base.protocol),
            direction: self.direction.or(base.direction),
            omega0: self.omega0.or(base.omega0),
            width: self.width.or(base.width),
            tau: self.tau.or(base.tau),
            eps: self.eps.or(base.eps),
            phase: self.phase.or(base.phase),
            t_start: self.t_start.or(base.t_start),
            t_end: self.t_end.or(base.t_end),
            dt: self.dt.or(base.dt),
            initial_level: self.initial_level.or(base.initial_level),
            max_rows: self.max_rows.or(base.max_rows),
            param: self.param.or(base.param),
            values: self.values.or(base.values),
        }
    }

    /// Resolve to a validated run configuration.
    ///
    /// `direction` is the one implied by the subcommand; a conflicting
    /// `direction` key is an error. Unset `tau` defaults to `0.7·width`, the
    /// window to `±(τ + 4T)` and `dt` to `T/2000`.
    pub fn resolve(&self, direction: Direction) -> Result<ProtocolConfig> {
        if let Some(d) = &self.direction {
            let d: Direction = d.parse()?;
            if d != direction {
                return Err(Error::Config(format!("config direction '{d}' conflicts with subcommand '{direction}'")));
            }
        }
        let protocol = match &self.protocol {
            Some(p) => p.parse()?,
            None => Protocol::CdStirap,
        };
        let mut cfg = ProtocolConfig::new(protocol, direction);
        let width = self.width.unwrap_or(cfg.width);
        let tau = self.tau.unwrap_or(DEFAULT_TAU_OVER_WIDTH * width);
        cfg = cfg.with_pulse(self.omega0.unwrap_or(cfg.omega0), width, tau);
        if let Some(eps) = &self.eps {
            let [e1, e2, e3] = <[f64; 3]>::try_from(eps.as_slice())
                .map_err(|_| Error::Config(format!("eps needs exactly 3 energies, got {}", eps.len())))?;
            cfg.eps = Spectrum::new(e1, e2, e3)?;
        }
        if let Some(phase) = self.phase {
            cfg.phase = phase;
        }
        if let Some(t) = self.t_start {
            cfg.t_start = t;
        }
        if let Some(t) = self.t_end {
            cfg.t_end = t;
        }
        if let Some(dt) = self.dt {
            cfg.dt = dt;
        }
        if let Some(level) = self.initial_level {
            cfg.initial_level = level;
        }
        if let Some(rows) = self.max_rows {
            cfg.max_rows = rows;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Resolve to a validated charging sweep over both protocols. With a
    /// `protocol` key only that protocol is swept.
    pub fn resolve_sweep(&self) -> Result<SweepSpec> {
        let parameter: SweepParameter = match &self.param {
            Some(p) => p.parse()?,
            None => return Err(Error::Config("sweep needs --param tau|omega0".into())),
        };
        let base = self.resolve(Direction::Charge)?;
        let mut spec = SweepSpec::new(parameter, base);
        if let Some(values) = &self.values {
            spec.values = values.clone();
        }
        if self.protocol.is_some() {
            spec.protocols = vec![spec.base.protocol];
        }
        spec.validate()?;
        Ok(spec)
    }
}
