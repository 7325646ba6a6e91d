//! Closed-system time evolution: `iψ̇ = Hψ` for pure states and
//! `ρ̇ = −i[H, ρ]` for density matrices, both by fixed-step RK4 with the
//! Hamiltonian evaluated at the stage times.
//!
//! No renormalisation is applied. The norm (or trace) error is recorded on
//! every row so that step-size problems stay visible.

use crate::error::{Error, Result};
use crate::metrics;
use crate::operators::{dark_state, h_total, level_vector, CMatrix3, CVector3, Operator3};
use crate::pulses::{mixing_angle, sample, ProtocolConfig, PulseSample};
use crate::C64;

/// Pure states may drift in norm by at most this much before the run aborts.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;
/// Same for the trace of a density matrix.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;

const PURE_NORM_TOL: f64 = 1e-9;
const MIXED_TRACE_TOL: f64 = 1e-9;
const MIXED_EIGEN_TOL: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-12;

/// State of the battery in the bare energy basis.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure(CVector3),
    Mixed(CMatrix3),
}

impl QuantumState {
    /// Basis state `|level⟩`, 1-based.
    pub fn level(level: usize) -> Self {
        QuantumState::Pure(level_vector(level))
    }

    pub fn pure(psi: CVector3) -> Result<Self> {
        let drift = (psi.norm_squared() - 1.0).abs();
        if drift.is_nan() || drift >= PURE_NORM_TOL {
            return Err(Error::InvalidState(format!("|‖ψ‖² − 1| = {drift:.3e}")));
        }
        Ok(QuantumState::Pure(psi))
    }

    pub fn density(rho: CMatrix3) -> Result<Self> {
        let herm = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm.is_nan() || herm >= HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("ρ not Hermitian (error {herm:.3e})")));
        }
        let trace_err = (rho.trace().re - 1.0).abs();
        if trace_err.is_nan() || trace_err >= MIXED_TRACE_TOL {
            return Err(Error::InvalidState(format!("|Tr ρ − 1| = {trace_err:.3e}")));
        }
        let min_eig = rho.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        if min_eig < -MIXED_EIGEN_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(QuantumState::Mixed(rho))
    }

    /// `I/3`.
    pub fn maximally_mixed() -> Self {
        QuantumState::Mixed(CMatrix3::identity() / C64::from(3.0))
    }

    pub fn to_density(&self) -> CMatrix3 {
        match self {
            QuantumState::Pure(psi) => psi * psi.adjoint(),
            QuantumState::Mixed(rho) => *rho,
        }
    }

    /// Level populations `P_n`, the diagonal of ρ.
    pub fn populations(&self) -> [f64; 3] {
        match self {
            QuantumState::Pure(psi) => [psi[0].norm_sqr(), psi[1].norm_sqr(), psi[2].norm_sqr()],
            QuantumState::Mixed(rho) => [rho[(0, 0)].re, rho[(1, 1)].re, rho[(2, 2)].re],
        }
    }

    /// `|‖ψ‖² − 1|` or `|Tr ρ − 1|`.
    pub fn norm_error(&self) -> f64 {
        match self {
            QuantumState::Pure(psi) => (psi.norm_squared() - 1.0).abs(),
            QuantumState::Mixed(rho) => (rho.trace().re - 1.0).abs(),
        }
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        match self {
            QuantumState::Pure(psi) => psi.norm_squared().powi(2),
            QuantumState::Mixed(rho) => (rho * rho).trace().re,
        }
    }

    /// `⟨v|ρ|v⟩`.
    pub fn overlap(&self, v: &CVector3) -> f64 {
        match self {
            QuantumState::Pure(psi) => v.dotc(psi).norm_sqr(),
            QuantumState::Mixed(rho) => v.dotc(&(rho * v)).re,
        }
    }
}

/// Population of the instantaneous dark state, `|⟨0(t)|ψ⟩|²`.
pub fn dark_fidelity(state: &QuantumState, pulse: &PulseSample) -> Result<f64> {
    let es = crate::operators::eigensystem(pulse)?;
    Ok(state.overlap(es.dark()))
}

/// One recorded row of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub populations: [f64; 3],
    pub energy: f64,
    pub ergotropy: f64,
    /// Charging power `C/(t − t_start)`.
    pub power: f64,
    /// Discharging power `(ε₃ − E)/(t − t_start)`.
    pub discharge_power: f64,
    pub dark_fidelity: f64,
    pub norm_error: f64,
    pub purity: f64,
    pub state: QuantumState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub config: ProtocolConfig,
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&TrajectorySample> {
        self.samples.last()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    pub fn max_norm_error(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_error).fold(0.0, f64::max)
    }

    pub fn min_dark_fidelity(&self) -> f64 {
        self.samples.iter().map(|s| s.dark_fidelity).fold(f64::INFINITY, f64::min)
    }
}

/// Vector-space operations needed by [`rk4_step`].
pub trait OdeState: Clone {
    /// `self + a·other`.
    fn add_scaled(&self, a: f64, other: &Self) -> Self;
}

impl OdeState for CVector3 {
    fn add_scaled(&self, a: f64, other: &Self) -> Self {
        self + other * C64::from(a)
    }
}

impl OdeState for CMatrix3 {
    fn add_scaled(&self, a: f64, other: &Self) -> Self {
        self + other * C64::from(a)
    }
}

/// Classic four-stage Runge–Kutta step for `ẏ = f(t, y)`.
pub fn rk4_step<S, F>(t: f64, y: &S, dt: f64, f: F) -> S
where
    S: OdeState,
    F: Fn(f64, &S) -> S,
{
    let half = 0.5 * dt;
    let k1 = f(t, y);
    let k2 = f(t + half, &y.add_scaled(half, &k1));
    let k3 = f(t + half, &y.add_scaled(half, &k2));
    let k4 = f(t + dt, &y.add_scaled(dt, &k3));
    let incr = k1.add_scaled(2.0, &k2).add_scaled(2.0, &k3).add_scaled(1.0, &k4);
    y.add_scaled(dt / 6.0, &incr)
}

/// Record every `k`-th step so that at most `max_rows` rows are kept,
/// counting the first and last grid points.
pub fn record_stride(steps: usize, max_rows: usize) -> usize {
    let interior = max_rows.saturating_sub(2).max(1);
    steps.div_ceil(interior).max(1)
}

/// The protocol Hamiltonian `H₁` or `H₂` at time `t`.
pub fn protocol_hamiltonian(cfg: &ProtocolConfig) -> impl Fn(f64) -> Operator3 + '_ {
    move |t| h_total(&sample(t, cfg))
}

/// Integrate `iψ̇ = H(t)ψ` for the configured protocol.
pub fn evolve_pure(psi0: &QuantumState, cfg: &ProtocolConfig) -> Result<Trajectory> {
    evolve_pure_with(psi0, cfg, protocol_hamiltonian(cfg))
}

/// As [`evolve_pure`] with a caller-supplied Hamiltonian. The config still
/// provides the window, step, spectrum and the dark state used for the
/// fidelity column.
pub fn evolve_pure_with<H>(psi0: &QuantumState, cfg: &ProtocolConfig, hamiltonian: H) -> Result<Trajectory>
where
    H: Fn(f64) -> Operator3,
{
    cfg.validate()?;
    let QuantumState::Pure(psi0) = psi0 else {
        return Err(Error::InvalidState("evolve_pure needs a pure state".into()));
    };
    let psi0 = QuantumState::pure(*psi0)?;
    let QuantumState::Pure(mut psi) = psi0 else { unreachable!() };
    let minus_i = C64::new(0.0, -1.0);
    integrate(cfg, |t, dt| {
        if dt > 0.0 {
            psi = rk4_step(t, &psi, dt, |s, y| hamiltonian(s).matrix * y * minus_i);
        }
        let state = QuantumState::Pure(psi);
        let drift = state.norm_error();
        if drift.is_nan() || drift > NORM_DRIFT_LIMIT {
            return Err(Error::NormDrift { t: t + dt, drift, limit: NORM_DRIFT_LIMIT });
        }
        Ok(state)
    })
}

/// Integrate `ρ̇ = −i[H(t), ρ]` for the configured protocol.
pub fn evolve_density(rho0: &QuantumState, cfg: &ProtocolConfig) -> Result<Trajectory> {
    evolve_density_with(rho0, cfg, protocol_hamiltonian(cfg))
}

pub fn evolve_density_with<H>(rho0: &QuantumState, cfg: &ProtocolConfig, hamiltonian: H) -> Result<Trajectory>
where
    H: Fn(f64) -> Operator3,
{
    cfg.validate()?;
    let mut rho = match rho0 {
        QuantumState::Pure(psi) => QuantumState::pure(*psi)?.to_density(),
        QuantumState::Mixed(rho) => QuantumState::density(*rho)?.to_density(),
    };
    let minus_i = C64::new(0.0, -1.0);
    integrate(cfg, |t, dt| {
        if dt > 0.0 {
            rho = rk4_step(t, &rho, dt, |s, r| {
                let h = hamiltonian(s).matrix;
                (h * r - r * h) * minus_i
            });
        }
        let state = QuantumState::Mixed(rho);
        let drift = state.norm_error();
        if drift.is_nan() || drift > TRACE_DRIFT_LIMIT {
            return Err(Error::TraceDrift { t: t + dt, drift, limit: TRACE_DRIFT_LIMIT });
        }
        Ok(state)
    })
}

/// Shared stepping loop. `advance(t, dt)` moves the state from `t` to
/// `t + dt` and returns it; it is first called with `dt = 0` to fetch the
/// initial state.
fn integrate<A>(cfg: &ProtocolConfig, mut advance: A) -> Result<Trajectory>
where
    A: FnMut(f64, f64) -> Result<QuantumState>,
{
    let steps = cfg.steps();
    let stride = record_stride(steps, cfg.max_rows);
    let mut samples = Vec::with_capacity(steps / stride + 2);

    let initial = advance(cfg.t_start, 0.0)?;
    samples.push(record(cfg, cfg.t_start, initial));
    for k in 0..steps {
        let t = cfg.grid_time(k);
        let dt = cfg.grid_time(k + 1) - t;
        let state = advance(t, dt)?;
        let done = k + 1;
        if done % stride == 0 || done == steps {
            samples.push(record(cfg, cfg.grid_time(done), state));
        }
    }
    Ok(Trajectory { config: cfg.clone(), samples })
}

fn record(cfg: &ProtocolConfig, t: f64, state: QuantumState) -> TrajectorySample {
    let elapsed = t - cfg.t_start;
    let energy = metrics::energy(&state, &cfg.eps);
    let ergotropy = energy - cfg.eps.ground();
    TrajectorySample {
        t,
        populations: state.populations(),
        energy,
        ergotropy,
        power: metrics::charging_power(ergotropy, elapsed),
        discharge_power: metrics::discharging_power(energy, &cfg.eps, elapsed),
        dark_fidelity: state.overlap(&dark_state(mixing_angle(t, cfg))),
        norm_error: state.norm_error(),
        purity: state.purity(),
        state,
    }
}
