//! Simulation of a resonantly driven three-level (Λ) quantum battery.
//!
//! The battery is charged (|1⟩ → |3⟩) or discharged (|3⟩ → |1⟩) by a pump
//! pulse on the 1–2 transition and a Stokes pulse on the 2–3 transition.
//! With bare STIRAP the transfer is only complete in the adiabatic limit;
//! adding a counterdiabatic field on the 1–3 transition with amplitude
//! `2θ̇` keeps the system locked to the dark state for any pulse width.
//!
//! Modules, bottom-up:
//!
//! - [`pulses`]: drive envelopes, mixing angle and the counterdiabatic field
//! - [`operators`]: Hamiltonians, instantaneous eigensystem, adiabatic frame
//! - [`dynamics`]: fixed-step RK4 for the Schrödinger and von Neumann equations
//! - [`metrics`]: energy, ergotropy and power functionals
//! - [`sweep`]: delay / amplitude sweeps over both protocols
//! - [`cli`]: command-line front end, config files, CSV and plot scripts
//!
//! Units: ħ = 1 throughout, so amplitudes and energies share units of 1/time.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod metrics;
pub mod operators;
pub mod pulses;
pub mod sweep;

pub use dynamics::{evolve_density, evolve_pure, QuantumState, Trajectory, TrajectorySample};
pub use error::{Error, Result};
pub use metrics::{trajectory_maxima, BatteryReadout};
pub use operators::{Eigensystem3, Operator3};
pub use pulses::{Direction, Protocol, ProtocolConfig, PulseSample, Spectrum};
pub use sweep::{run_sweep, SweepParameter, SweepResult, SweepSpec};

/// Complex scalar used for all state and operator entries.
pub type C64 = num_complex::Complex64;
