//! Energy, ergotropy and power of the battery.

use crate::dynamics::{QuantumState, Trajectory};
use crate::error::{Error, Result};
use crate::pulses::Spectrum;

/// Energy bookkeeping at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryReadout {
    pub energy: f64,
    pub ergotropy: f64,
    /// Time since the start of the run.
    pub elapsed: f64,
    pub power: f64,
}

impl BatteryReadout {
    pub fn charging(state: &QuantumState, eps: &Spectrum, elapsed: f64) -> Self {
        let energy = energy(state, eps);
        let ergotropy = energy - eps.ground();
        BatteryReadout { energy, ergotropy, elapsed, power: charging_power(ergotropy, elapsed) }
    }
}

/// `E = Tr(ρH₀) = Σ P_n ε_n`.
pub fn energy(state: &QuantumState, eps: &Spectrum) -> f64 {
    let p = state.populations();
    let e = eps.levels();
    p[0] * e[0] + p[1] * e[1] + p[2] * e[2]
}

/// `C = E − ε₁`; the full ergotropy for any pure state.
pub fn ergotropy_simple(state: &QuantumState, eps: &Spectrum) -> f64 {
    energy(state, eps) - eps.ground()
}

/// Energy of the passive state with spectrum `r`: largest weight on the
/// lowest level, and so on.
pub fn passive_energy(mut r: [f64; 3], eps: &Spectrum) -> f64 {
    r.sort_by(|a, b| b.total_cmp(a));
    let e = eps.levels();
    r[0] * e[0] + r[1] * e[1] + r[2] * e[2]
}

/// Maximal unitarily extractable work, `Tr(ρH₀) − Σ r↓_n ε↑_n`.
pub fn ergotropy_general(state: &QuantumState, eps: &Spectrum) -> f64 {
    let spectrum = match state {
        QuantumState::Pure(psi) => [psi.norm_squared(), 0.0, 0.0],
        QuantumState::Mixed(rho) => {
            let diagonal = (0..3).all(|i| (0..3).all(|j| i == j || rho[(i, j)].norm() == 0.0));
            if diagonal {
                [rho[(0, 0)].re, rho[(1, 1)].re, rho[(2, 2)].re]
            } else {
                let ev = rho.symmetric_eigenvalues();
                [ev[0], ev[1], ev[2]]
            }
        }
    };
    (energy(state, eps) - passive_energy(spectrum, eps)).max(0.0)
}

/// `P = C/elapsed`, zero at `elapsed = 0`.
pub fn charging_power(ergotropy: f64, elapsed: f64) -> f64 {
    if elapsed > 0.0 {
        ergotropy / elapsed
    } else {
        0.0
    }
}

/// `P_d = (ε₃ − E)/elapsed`, zero at `elapsed = 0`.
pub fn discharging_power(energy: f64, eps: &Spectrum, elapsed: f64) -> f64 {
    if elapsed > 0.0 {
        (eps.top() - energy) / elapsed
    } else {
        0.0
    }
}

/// Largest ergotropy and largest charging power over the recorded rows.
pub fn trajectory_maxima(traj: &Trajectory) -> Result<(f64, f64)> {
    if traj.samples.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let c_max = traj.samples.iter().map(|s| s.ergotropy).fold(f64::NEG_INFINITY, f64::max);
    let p_max = traj.samples.iter().map(|s| s.power).fold(f64::NEG_INFINITY, f64::max);
    Ok((c_max, p_max))
}
