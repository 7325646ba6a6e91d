//! Cross-module invariant suite behind the `validate` subcommand.

use crate::dynamics::{evolve_density, evolve_pure, evolve_pure_with, QuantumState, Trajectory};
use crate::error::Result;
use crate::operators::{h_stirap, to_adiabatic_frame};
use crate::pulses::{
    cd_amplitude, mixing_angle, mixing_angle_rate, sample, Direction, Protocol, ProtocolConfig, PulseSample,
};

pub const FRAME_DECOUPLING_TOL: f64 = 1e-10;
pub const CD_RATE_TOL: f64 = 1e-6;
pub const NORM_TOL: f64 = 1e-9;
pub const STEP_HALVING_TOL: f64 = 1e-8;
pub const RABI_TOL: f64 = 1e-6;
pub const PURE_DENSITY_TOL: f64 = 1e-8;
pub const DARK_LOCK_TOL: f64 = 1e-3;
pub const FRAME_SAMPLES: usize = 1000;

/// Deliberate faults, used to check that the suite can fail.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Faults {
    /// Use `−2θ̇` instead of `2θ̇` for the charging CD field.
    pub flip_cd_sign: bool,
    /// Integrate with `dt = T/10`.
    pub coarse_dt: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{mark}] {:<22} {}", self.name, self.detail)
    }
}

fn check(name: &'static str, value: Result<f64>, limit: f64, what: &str) -> CheckOutcome {
    match value {
        Ok(v) => CheckOutcome {
            name,
            passed: v < limit,
            detail: format!("{what} = {v:.3e} (limit {limit:.0e})"),
        },
        Err(e) => CheckOutcome { name, passed: false, detail: e.to_string() },
    }
}

fn default_run(faults: &Faults) -> ProtocolConfig {
    let mut cfg = ProtocolConfig::new(Protocol::CdStirap, Direction::Charge);
    if faults.coarse_dt {
        cfg.dt = cfg.width / 10.0;
    }
    cfg
}

fn window_times(cfg: &ProtocolConfig, n: usize) -> impl Iterator<Item = f64> + '_ {
    (0..n).map(move |k| cfg.t_start + (cfg.t_end - cfg.t_start) * k as f64 / (n - 1) as f64)
}

fn faulty_cd(t: f64, cfg: &ProtocolConfig, faults: &Faults) -> f64 {
    let cd = cd_amplitude(t, cfg);
    if faults.flip_cd_sign {
        -cd
    } else {
        cd
    }
}

/// Largest `|H′_ij|/Ω` off the diagonal over the window.
pub fn frame_decoupling(cfg: &ProtocolConfig, n: usize, cd: impl Fn(f64) -> f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for t in window_times(cfg, n) {
        let pulse = PulseSample { omega_cd: cd(t), ..sample(t, cfg) };
        let framed = to_adiabatic_frame(&pulse, mixing_angle_rate(t, cfg))?;
        worst = worst.max(framed.max_off_diagonal() / pulse.rabi());
    }
    Ok(worst)
}

/// Largest `|Ω_cd − 2θ̇_fd|` with a central difference of step `1e-6·T`.
pub fn cd_vs_finite_difference(cfg: &ProtocolConfig, n: usize, cd: impl Fn(f64) -> f64) -> f64 {
    let h = 1e-6 * cfg.width;
    window_times(cfg, n)
        .map(|t| {
            let fd = (mixing_angle(t + h, cfg) - mixing_angle(t - h, cfg)) / (2.0 * h);
            (cd(t) - 2.0 * fd).abs()
        })
        .fold(0.0, f64::max)
}

/// Largest deviation of `P₂` from `sin²(Ωt/2)` under a constant pump drive.
pub fn rabi_oracle_error(cfg: &ProtocolConfig, omega: f64) -> Result<f64> {
    let traj = evolve_pure_with(&QuantumState::level(1), cfg, |_| h_stirap(&PulseSample::stirap(omega, 0.0)))?;
    Ok(traj
        .samples
        .iter()
        .map(|s| {
            let expect = (0.5 * omega * (s.t - cfg.t_start)).sin().powi(2);
            (s.populations[1] - expect).abs()
        })
        .fold(0.0, f64::max))
}

/// Change in final populations and energy when the step is halved.
pub fn step_halving_change(cfg: &ProtocolConfig) -> Result<f64> {
    let coarse = evolve_pure(&QuantumState::level(cfg.initial_level), cfg)?;
    let mut fine_cfg = cfg.clone();
    fine_cfg.dt = cfg.effective_dt() / 2.0;
    let fine = evolve_pure(&QuantumState::level(cfg.initial_level), &fine_cfg)?;
    let (a, b) = (coarse.last().expect("nonempty"), fine.last().expect("nonempty"));
    let pops = (0..3).map(|n| (a.populations[n] - b.populations[n]).abs()).fold(0.0, f64::max);
    Ok(pops.max((a.energy - b.energy).abs()))
}

/// Largest population mismatch between pure and density-matrix runs.
pub fn pure_density_mismatch(pure: &Trajectory, mixed: &Trajectory) -> f64 {
    pure.samples
        .iter()
        .zip(&mixed.samples)
        .flat_map(|(a, b)| (0..3).map(move |n| (a.populations[n] - b.populations[n]).abs()))
        .fold(0.0, f64::max)
}

pub fn run_checks(faults: &Faults) -> Vec<CheckOutcome> {
    let cfg = default_run(faults);
    let cd = |t| faulty_cd(t, &cfg, faults);
    let start = QuantumState::level(1);
    let pure = evolve_pure(&start, &cfg);
    let mixed = evolve_density(&start, &cfg);

    let mut out = vec![
        check(
            "frame-decoupling",
            frame_decoupling(&cfg, FRAME_SAMPLES, cd),
            FRAME_DECOUPLING_TOL,
            "max |H'_offdiag|/Ω",
        ),
        check(
            "cd-equals-2-theta-dot",
            Ok(cd_vs_finite_difference(&cfg, FRAME_SAMPLES, cd)),
            CD_RATE_TOL,
            "max |Ω_cd − 2θ̇_fd|",
        ),
        check(
            "norm-conservation",
            pure.as_ref().map(Trajectory::max_norm_error).map_err(Clone::clone),
            NORM_TOL,
            "max |‖ψ‖² − 1|",
        ),
        check(
            "trace-conservation",
            mixed.as_ref().map(Trajectory::max_norm_error).map_err(Clone::clone),
            NORM_TOL,
            "max |Tr ρ − 1|",
        ),
        check("step-halving", step_halving_change(&cfg), STEP_HALVING_TOL, "final-state change"),
        check("rabi-oracle", rabi_oracle_error(&cfg, 1.3), RABI_TOL, "max |P₂ − sin²(Ωt/2)|"),
    ];
    let mismatch = match (&pure, &mixed) {
        (Ok(p), Ok(m)) => Ok(pure_density_mismatch(p, m)),
        (Err(e), _) | (_, Err(e)) => Err(e.clone()),
    };
    out.push(check("pure-density-agreement", mismatch, PURE_DENSITY_TOL, "max |ΔP_n|"));
    out.push(check(
        "dark-state-locking",
        pure.as_ref().map(|p| 1.0 - p.min_dark_fidelity()).map_err(Clone::clone),
        DARK_LOCK_TOL,
        "1 − min F_dark",
    ));
    out
}
