//! Delay and amplitude sweeps of the charging protocols.

use std::time::SystemTime;

use rayon::prelude::*;

use crate::dynamics::{evolve_pure, QuantumState};
use crate::error::{Error, Result};
use crate::metrics::trajectory_maxima;
use crate::pulses::{Direction, Protocol, ProtocolConfig, WINDOW_WIDTHS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParameter {
    Tau,
    Omega0,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Tau => "tau",
            SweepParameter::Omega0 => "omega0",
        }
    }

    /// τ ∈ {0, 0.1T, …, T} or Ω₀ ∈ {0.2, 0.4, …, 3.0}.
    pub fn default_values(self, width: f64) -> Vec<f64> {
        match self {
            SweepParameter::Tau => (0..=10).map(|k| k as f64 / 10.0 * width).collect(),
            SweepParameter::Omega0 => (1..=15).map(|k| k as f64 * 0.2).collect(),
        }
    }
}

impl std::fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tau" => Ok(SweepParameter::Tau),
            "omega0" => Ok(SweepParameter::Omega0),
            other => Err(Error::Config(format!("unknown sweep parameter '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    /// Charging configuration the swept value is substituted into.
    pub base: ProtocolConfig,
    pub protocols: Vec<Protocol>,
}

impl SweepSpec {
    /// Both protocols over the default grid.
    pub fn new(parameter: SweepParameter, base: ProtocolConfig) -> Self {
        let values = parameter.default_values(base.width);
        SweepSpec { parameter, values, base, protocols: Protocol::ALL.to_vec() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.base.direction != Direction::Charge {
            return bad("sweeps run the charging direction only".into());
        }
        if self.values.is_empty() {
            return bad("sweep values must be nonempty".into());
        }
        if self.protocols.is_empty() {
            return bad("sweep needs at least one protocol".into());
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return bad("sweep values must be finite".into());
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("sweep values must be strictly increasing: {:?}", self.values));
        }
        let min_ok = match self.parameter {
            SweepParameter::Tau => self.values[0] >= 0.0,
            SweepParameter::Omega0 => self.values[0] > 0.0,
        };
        if !min_ok {
            return bad(format!("{} values out of range: {:?}", self.parameter, self.values));
        }
        Ok(())
    }

    /// Configuration for one row.
    ///
    /// For a τ sweep every row shares the window of the largest τ, so the
    /// power clock `t − t_start` has the same origin across the sweep.
    pub fn row_config(&self, value: f64, protocol: Protocol) -> ProtocolConfig {
        let mut cfg = self.base.with_protocol(protocol);
        match self.parameter {
            SweepParameter::Omega0 => cfg.omega0 = value,
            SweepParameter::Tau => {
                cfg.tau = value;
                let tau_max = self.values.iter().copied().fold(value, f64::max);
                let half = tau_max + WINDOW_WIDTHS * cfg.width;
                cfg.t_start = cfg.t_start.min(-half);
                cfg.t_end = cfg.t_end.max(half);
            }
        }
        cfg
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowMetrics {
    pub c_max: f64,
    pub p_max: f64,
    pub c_final: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub protocol: Protocol,
    /// Failure message when this point could not be computed.
    pub outcome: std::result::Result<RowMetrics, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub parameter: SweepParameter,
    pub base: ProtocolConfig,
    pub rows: Vec<SweepRow>,
    pub timestamp: SystemTime,
}

impl SweepResult {
    pub fn succeeded(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_ok()).count()
    }

    /// Successful rows for one protocol, in sweep order.
    pub fn series(&self, protocol: Protocol) -> Vec<(f64, RowMetrics)> {
        self.rows
            .iter()
            .filter(|r| r.protocol == protocol)
            .filter_map(|r| r.outcome.as_ref().ok().map(|m| (r.value, *m)))
            .collect()
    }
}

fn run_row(spec: &SweepSpec, value: f64, protocol: Protocol) -> SweepRow {
    let outcome = (|| {
        let cfg = spec.row_config(value, protocol);
        let traj = evolve_pure(&QuantumState::level(1), &cfg)?;
        let (c_max, p_max) = trajectory_maxima(&traj)?;
        let c_final = traj.last().map(|s| s.ergotropy).ok_or(Error::EmptyTrajectory)?;
        Ok::<_, Error>(RowMetrics { c_max, p_max, c_final })
    })()
    .map_err(|e| e.to_string());
    SweepRow { value, protocol, outcome }
}

fn work_items(spec: &SweepSpec) -> Vec<(f64, Protocol)> {
    spec.values
        .iter()
        .flat_map(|&v| spec.protocols.iter().map(move |&p| (v, p)))
        .collect()
}

/// Run every (value, protocol) pair on the rayon pool. Rows come back values
/// outer, protocols inner; a failing row is marked, not fatal.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let rows = work_items(spec)
        .into_par_iter()
        .map(|(v, p)| run_row(spec, v, p))
        .collect();
    Ok(assemble(spec, rows))
}

/// Single-threaded [`run_sweep`].
pub fn run_sweep_serial(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let rows = work_items(spec).into_iter().map(|(v, p)| run_row(spec, v, p)).collect();
    Ok(assemble(spec, rows))
}

fn assemble(spec: &SweepSpec, rows: Vec<SweepRow>) -> SweepResult {
    SweepResult {
        parameter: spec.parameter,
        base: spec.base.clone(),
        rows,
        timestamp: SystemTime::now(),
    }
}
