//! Drive envelopes for the pump, Stokes and counterdiabatic fields.
//!
//! Charging uses the counterintuitive order: the Stokes pulse (2–3) peaks at
//! `-τ`, before the pump (1–2) at `+τ`. Discharging swaps the two envelopes
//! and negates the counterdiabatic field, which sends the dark state back
//! from |3⟩ to |1⟩.
//!
//! With Gaussian envelopes of common width `T` the mixing angle has the
//! closed form `θ(t) = arctan(exp(±4τt/T²))`, so its rate and the
//! counterdiabatic amplitude are evaluated analytically.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Which drive sequence is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    /// Pump and Stokes only.
    Stirap,
    /// Pump and Stokes plus the counterdiabatic field on the 1–3 transition.
    CdStirap,
}

impl Protocol {
    pub const ALL: [Protocol; 2] = [Protocol::Stirap, Protocol::CdStirap];

    /// Lower-case name used on the command line and in CSV files.
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Stirap => "stirap",
            Protocol::CdStirap => "cdstirap",
        }
    }
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "stirap" => Ok(Protocol::Stirap),
            "cdstirap" | "cd-stirap" => Ok(Protocol::CdStirap),
            other => Err(Error::Config(format!("unknown protocol '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// |1⟩ → |3⟩.
    Charge,
    /// |3⟩ → |1⟩.
    Discharge,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Charge => "charge",
            Direction::Discharge => "discharge",
        }
    }

    /// Battery level the run starts from by default.
    pub fn default_initial_level(self) -> usize {
        match self {
            Direction::Charge => 1,
            Direction::Discharge => 3,
        }
    }

    fn sign(self) -> f64 {
        match self {
            Direction::Charge => 1.0,
            Direction::Discharge => -1.0,
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "charge" => Ok(Direction::Charge),
            "discharge" => Ok(Direction::Discharge),
            other => Err(Error::Config(format!("unknown direction '{other}'"))),
        }
    }
}

/// Bare energies `(ε₁, ε₂, ε₃)`, strictly increasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum([f64; 3]);

impl Spectrum {
    pub fn new(e1: f64, e2: f64, e3: f64) -> Result<Self> {
        let levels = [e1, e2, e3];
        if levels.iter().any(|e| !e.is_finite()) {
            return Err(Error::Config(format!("energies must be finite, got {levels:?}")));
        }
        if !(e1 < e2 && e2 < e3) {
            return Err(Error::Config(format!(
                "energies must be strictly increasing, got {levels:?}"
            )));
        }
        Ok(Spectrum(levels))
    }

    pub fn levels(&self) -> [f64; 3] {
        self.0
    }

    pub fn ground(&self) -> f64 {
        self.0[0]
    }

    pub fn top(&self) -> f64 {
        self.0[2]
    }

    /// Largest storable ergotropy, `ε₃ − ε₁`.
    pub fn capacity(&self) -> f64 {
        self.0[2] - self.0[0]
    }
}

impl Default for Spectrum {
    fn default() -> Self {
        Spectrum([0.0, 1.0, 1.95])
    }
}

/// Everything needed to run one charge or discharge.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub protocol: Protocol,
    pub direction: Direction,
    /// Peak Rabi amplitude Ω₀.
    pub omega0: f64,
    /// Pulse width T.
    pub width: f64,
    /// Pulse delay τ.
    pub tau: f64,
    pub eps: Spectrum,
    /// Counterdiabatic phase φ.
    pub phase: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// Requested integrator step; the grid uses the nearest step that divides
    /// the window evenly.
    pub dt: f64,
    /// 1-based level the battery starts in.
    pub initial_level: usize,
    /// Upper bound on recorded trajectory rows.
    pub max_rows: usize,
}

pub const DEFAULT_TAU_OVER_WIDTH: f64 = 0.7;
pub const DEFAULT_STEPS_PER_WIDTH: f64 = 2000.0;
/// Half-window is `τ + WINDOW_WIDTHS·T`.
pub const WINDOW_WIDTHS: f64 = 4.0;
pub const DEFAULT_MAX_ROWS: usize = 5000;

impl ProtocolConfig {
    /// Ω₀ = 1, T = 1, τ = 0.7T, ε = (0, 1, 1.95), φ = π/2, default window and step.
    pub fn new(protocol: Protocol, direction: Direction) -> Self {
        let width = 1.0;
        let tau = DEFAULT_TAU_OVER_WIDTH * width;
        let mut cfg = ProtocolConfig {
            protocol,
            direction,
            omega0: 1.0,
            width,
            tau,
            eps: Spectrum::default(),
            phase: FRAC_PI_2,
            t_start: 0.0,
            t_end: 0.0,
            dt: 0.0,
            initial_level: direction.default_initial_level(),
            max_rows: DEFAULT_MAX_ROWS,
        };
        cfg.fit_window();
        cfg
    }

    /// Resets the window to `±(τ + 4T)` and the step to `T/2000`.
    pub fn fit_window(&mut self) {
        let half = self.tau + WINDOW_WIDTHS * self.width;
        self.t_start = -half;
        self.t_end = half;
        self.dt = self.width / DEFAULT_STEPS_PER_WIDTH;
    }

    /// Copy with new pulse parameters and a refitted window.
    pub fn with_pulse(&self, omega0: f64, width: f64, tau: f64) -> Self {
        let mut cfg = self.clone();
        cfg.omega0 = omega0;
        cfg.width = width;
        cfg.tau = tau;
        cfg.fit_window();
        cfg
    }

    pub fn with_protocol(&self, protocol: Protocol) -> Self {
        ProtocolConfig { protocol, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let finite = [self.omega0, self.width, self.tau, self.phase, self.t_start, self.t_end, self.dt];
        if finite.iter().any(|x| !x.is_finite()) {
            return bad("all numeric parameters must be finite".into());
        }
        if self.omega0 <= 0.0 {
            return bad(format!("omega0 must be > 0, got {}", self.omega0));
        }
        if self.width <= 0.0 {
            return bad(format!("width must be > 0, got {}", self.width));
        }
        if self.tau < 0.0 {
            return bad(format!("tau must be >= 0, got {}", self.tau));
        }
        if self.dt <= 0.0 {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if self.t_start >= self.t_end {
            return bad(format!("t_start ({}) must be < t_end ({})", self.t_start, self.t_end));
        }
        let half = self.tau + WINDOW_WIDTHS * self.width;
        if self.t_start > -half || self.t_end < half {
            return bad(format!(
                "window [{}, {}] does not cover the pulses, need [-{half}, {half}]",
                self.t_start, self.t_end
            ));
        }
        Spectrum::new(self.eps.0[0], self.eps.0[1], self.eps.0[2])?;
        if !(1..=3).contains(&self.initial_level) {
            return bad(format!("initial_level must be 1, 2 or 3, got {}", self.initial_level));
        }
        if self.max_rows < 2 {
            return bad(format!("max_rows must be >= 2, got {}", self.max_rows));
        }
        Ok(())
    }

    /// Number of integrator steps across the window.
    pub fn steps(&self) -> usize {
        ((self.t_end - self.t_start) / self.dt).round().max(1.0) as usize
    }

    /// Step actually used: the window split into [`steps`](Self::steps) equal parts.
    pub fn effective_dt(&self) -> f64 {
        (self.t_end - self.t_start) / self.steps() as f64
    }

    /// Time on the integrator grid after `k` steps.
    pub fn grid_time(&self, k: usize) -> f64 {
        let n = self.steps();
        if k == n {
            self.t_end
        } else {
            self.t_start + k as f64 * self.effective_dt()
        }
    }

    /// Rate constant `4τ/T²` shared by the mixing angle and the CD field.
    fn sweep_rate(&self) -> f64 {
        4.0 * self.tau / (self.width * self.width)
    }
}

/// Drive amplitudes and counterdiabatic phase at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSample {
    pub omega_p: f64,
    pub omega_s: f64,
    pub omega_cd: f64,
    pub phase: f64,
}

impl PulseSample {
    /// Pump/Stokes-only sample with zero CD field.
    pub fn stirap(omega_p: f64, omega_s: f64) -> Self {
        PulseSample { omega_p, omega_s, omega_cd: 0.0, phase: FRAC_PI_2 }
    }

    /// RMS Rabi amplitude `√(Ω_p² + Ω_s²)`.
    pub fn rabi(&self) -> f64 {
        self.omega_p.hypot(self.omega_s)
    }

    /// `θ = atan2(Ω_p, Ω_s)`, undefined when both amplitudes vanish.
    pub fn mixing_angle(&self) -> Result<f64> {
        if self.omega_p == 0.0 && self.omega_s == 0.0 {
            return Err(Error::DegeneratePulse);
        }
        Ok(self.omega_p.atan2(self.omega_s))
    }
}

pub fn pump_amplitude(t: f64, cfg: &ProtocolConfig) -> f64 {
    let x = (t - cfg.direction.sign() * cfg.tau) / cfg.width;
    cfg.omega0 * (-x * x).exp()
}

pub fn stokes_amplitude(t: f64, cfg: &ProtocolConfig) -> f64 {
    let x = (t + cfg.direction.sign() * cfg.tau) / cfg.width;
    cfg.omega0 * (-x * x).exp()
}

/// Mixing angle `θ ∈ [0, π/2]` with `tan θ = Ω_p/Ω_s`.
///
/// Far in the tails both Gaussians can underflow to zero; the angle then
/// falls back to its closed form `arctan(exp(±4τt/T²))`.
pub fn mixing_angle(t: f64, cfg: &ProtocolConfig) -> f64 {
    let p = pump_amplitude(t, cfg);
    let s = stokes_amplitude(t, cfg);
    if p == 0.0 && s == 0.0 {
        (cfg.direction.sign() * cfg.sweep_rate() * t).exp().atan()
    } else {
        p.atan2(s)
    }
}

/// `θ̇ = ±(2τ/T²) sech(4τt/T²)`, positive when charging.
pub fn mixing_angle_rate(t: f64, cfg: &ProtocolConfig) -> f64 {
    let k = cfg.sweep_rate();
    cfg.direction.sign() * 0.5 * k / (k * t).cosh()
}

/// Signed counterdiabatic amplitude `Ω_cd = 2θ̇`, zero for bare STIRAP.
pub fn cd_amplitude(t: f64, cfg: &ProtocolConfig) -> f64 {
    match cfg.protocol {
        Protocol::Stirap => 0.0,
        Protocol::CdStirap => 2.0 * mixing_angle_rate(t, cfg),
    }
}

pub fn sample(t: f64, cfg: &ProtocolConfig) -> PulseSample {
    PulseSample {
        omega_p: pump_amplitude(t, cfg),
        omega_s: stokes_amplitude(t, cfg),
        omega_cd: cd_amplitude(t, cfg),
        phase: cfg.phase,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    fn charge(protocol: Protocol) -> ProtocolConfig {
        ProtocolConfig::new(protocol, Direction::Charge)
    }

    fn discharge(protocol: Protocol) -> ProtocolConfig {
        ProtocolConfig::new(protocol, Direction::Discharge)
    }

    #[test]
    fn defaults() {
        let cfg = charge(Protocol::CdStirap);
        assert_eq!(cfg.omega0, 1.0);
        assert_eq!(cfg.width, 1.0);
        assert_abs_diff_eq!(cfg.tau, 0.7);
        assert_eq!(cfg.eps.levels(), [0.0, 1.0, 1.95]);
        assert_eq!(cfg.phase, FRAC_PI_2);
        assert_abs_diff_eq!(cfg.t_start, -4.7);
        assert_abs_diff_eq!(cfg.t_end, 4.7);
        assert_eq!(cfg.dt, 1.0 / 2000.0);
        assert_eq!(cfg.steps(), 18800);
        assert_eq!(cfg.initial_level, 1);
        assert_eq!(discharge(Protocol::Stirap).initial_level, 3);
        cfg.validate().unwrap();
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let base = charge(Protocol::CdStirap);
        #[allow(clippy::type_complexity)]
        let cases: Vec<Box<dyn Fn(&mut ProtocolConfig)>> = vec![
            Box::new(|c| c.omega0 = 0.0),
            Box::new(|c| c.width = -1.0),
            Box::new(|c| c.tau = -0.1),
            Box::new(|c| c.dt = 0.0),
            Box::new(|c| c.t_end = c.t_start),
            Box::new(|c| c.t_start = -1.0),
            Box::new(|c| c.t_end = 4.0),
            Box::new(|c| c.eps = Spectrum([0.0, 2.0, 1.0])),
            Box::new(|c| c.initial_level = 0),
            Box::new(|c| c.omega0 = f64::NAN),
        ];
        for mutate in cases {
            let mut cfg = base.clone();
            mutate(&mut cfg);
            assert!(matches!(cfg.validate(), Err(Error::Config(_))), "{cfg:?}");
        }
    }

    #[test]
    fn spectrum_must_increase() {
        assert!(Spectrum::new(0.0, 1.0, 1.95).is_ok());
        assert!(Spectrum::new(0.0, 1.0, 1.0).is_err());
        assert!(Spectrum::new(1.0, 0.0, 2.0).is_err());
        assert!(Spectrum::new(0.0, f64::INFINITY, 2.0).is_err());
    }

    #[test]
    fn grid_ends_exactly_on_window() {
        let mut cfg = charge(Protocol::Stirap);
        cfg.dt = 0.3;
        let n = cfg.steps();
        assert_eq!(cfg.grid_time(0), cfg.t_start);
        assert_eq!(cfg.grid_time(n), cfg.t_end);
        assert_abs_diff_eq!(cfg.effective_dt() * n as f64, 9.4, epsilon = 1e-12);
    }

    #[test]
    fn pump_examples() {
        let cfg = charge(Protocol::Stirap);
        assert_abs_diff_eq!(pump_amplitude(0.7, &cfg), 1.0, epsilon = 1e-15);
        // e^{-0.49}
        assert_abs_diff_eq!(pump_amplitude(0.0, &cfg), 0.6126263941844161, epsilon = 1e-15);

        for direction in [Direction::Charge, Direction::Discharge] {
            let cfg = ProtocolConfig::new(Protocol::Stirap, direction).with_pulse(2.5, 0.8, 0.0);
            assert_eq!(pump_amplitude(0.0, &cfg), 2.5);
            assert_eq!(stokes_amplitude(0.0, &cfg), 2.5);
        }
    }

    #[test]
    fn stokes_examples() {
        let cfg = charge(Protocol::Stirap);
        assert_abs_diff_eq!(stokes_amplitude(-0.7, &cfg), 1.0, epsilon = 1e-15);
        for t in [-3.0, -0.4, 0.0, 0.25, 1.7] {
            assert_eq!(stokes_amplitude(t, &cfg), pump_amplitude(-t, &cfg));
            assert_eq!(
                stokes_amplitude(t, &discharge(Protocol::Stirap)),
                pump_amplitude(t, &cfg)
            );
        }
    }

    #[test]
    fn mixing_angle_examples() {
        let cfg = charge(Protocol::CdStirap);
        assert_abs_diff_eq!(mixing_angle(0.0, &cfg), FRAC_PI_4, epsilon = 1e-15);
        assert_abs_diff_eq!(mixing_angle(-30.0, &cfg), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mixing_angle(30.0, &cfg), FRAC_PI_2, epsilon = 1e-15);
        // arctan(e^{4·0.7·0.3}) evaluated at 30 digits
        assert_abs_diff_eq!(mixing_angle(0.3, &cfg), 1.163255563526101, epsilon = 1e-14);
        for t in [-4.0f64, -1.3, -0.2, 0.6, 2.2, 4.5] {
            let closed = (4.0 * 0.7 * t).exp().atan();
            assert_abs_diff_eq!(mixing_angle(t, &cfg), closed, epsilon = 1e-13);
        }
    }

    #[test]
    fn mixing_angle_survives_underflow() {
        let cfg = charge(Protocol::CdStirap);
        // Both Gaussians are exactly zero out here.
        assert_eq!(pump_amplitude(-1e3, &cfg), 0.0);
        assert_eq!(stokes_amplitude(-1e3, &cfg), 0.0);
        assert_eq!(mixing_angle(-1e3, &cfg), 0.0);
        assert_eq!(mixing_angle(1e3, &cfg), FRAC_PI_2);
        assert_eq!(mixing_angle(-1e3, &discharge(Protocol::CdStirap)), FRAC_PI_2);

        let zero_delay = charge(Protocol::CdStirap).with_pulse(1.0, 1.0, 0.0);
        assert_eq!(mixing_angle(1e3, &zero_delay), FRAC_PI_4);
        assert_eq!(PulseSample::stirap(0.0, 0.0).mixing_angle(), Err(Error::DegeneratePulse));
    }

    #[test]
    fn mixing_rate_examples() {
        let cfg = charge(Protocol::CdStirap);
        assert_abs_diff_eq!(mixing_angle_rate(0.0, &cfg), 1.4, epsilon = 1e-15);
        let flat = cfg.with_pulse(1.0, 1.0, 0.0);
        for t in [-2.0, 0.0, 3.0] {
            assert_eq!(mixing_angle_rate(t, &flat), 0.0);
        }
        for t in [-4.7f64, -1.0, 0.0, 0.5, 2.0, 4.7] {
            let eq16 = 2.8 / (2.8 * t).cosh();
            assert_abs_diff_eq!(2.0 * mixing_angle_rate(t, &cfg), eq16, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(
            mixing_angle_rate(0.3, &discharge(Protocol::CdStirap)),
            -mixing_angle_rate(0.3, &cfg)
        );
    }

    #[test]
    fn cd_examples() {
        let cfg = charge(Protocol::CdStirap);
        assert_abs_diff_eq!(cd_amplitude(0.0, &cfg), 2.8, epsilon = 1e-15);
        // 2.8/cosh(2.8) at 30 digits
        assert_abs_diff_eq!(cd_amplitude(1.0, &cfg), 0.3392817330907589, epsilon = 1e-15);
        for t in [-3.0, 0.0, 1.0] {
            assert_eq!(cd_amplitude(t, &charge(Protocol::Stirap)), 0.0);
        }
        assert_abs_diff_eq!(cd_amplitude(0.0, &discharge(Protocol::CdStirap)), -2.8, epsilon = 1e-15);
    }

    #[test]
    fn sample_examples() {
        let s = sample(0.0, &charge(Protocol::Stirap));
        assert_abs_diff_eq!(s.omega_p, 0.612626394184416, epsilon = 1e-14);
        assert_abs_diff_eq!(s.omega_s, 0.612626394184416, epsilon = 1e-14);
        assert_eq!(s.omega_cd, 0.0);
        assert_eq!(s.phase, FRAC_PI_2);

        let s = sample(0.0, &charge(Protocol::CdStirap));
        assert_abs_diff_eq!(s.omega_cd, 2.8, epsilon = 1e-15);

        let s = sample(0.4, &charge(Protocol::CdStirap).with_pulse(1.0, 1.0, 0.0));
        assert_eq!(s.omega_cd, 0.0);
    }

    #[test]
    fn cd_matches_finite_difference() {
        let cfg = charge(Protocol::CdStirap);
        let h = 1e-6 * cfg.width;
        let n = 2000;
        let mut worst = 0.0f64;
        for k in 0..=n {
            let t = cfg.t_start + (cfg.t_end - cfg.t_start) * k as f64 / n as f64;
            let fd = (mixing_angle(t + h, &cfg) - mixing_angle(t - h, &cfg)) / (2.0 * h);
            assert_eq!(cd_amplitude(t, &cfg), 2.0 * mixing_angle_rate(t, &cfg));
            worst = worst.max((cd_amplitude(t, &cfg) - 2.0 * fd).abs());
        }
        assert!(worst < 1e-6, "worst {worst}");
    }

    proptest! {
        #[test]
        fn envelope_duality(t in -10.0f64..10.0, omega0 in 0.1f64..5.0, width in 0.2f64..3.0, tau in 0.0f64..2.0) {
            let c = charge(Protocol::CdStirap).with_pulse(omega0, width, tau);
            let d = discharge(Protocol::CdStirap).with_pulse(omega0, width, tau);
            prop_assert_eq!(pump_amplitude(t, &d), stokes_amplitude(t, &c));
            prop_assert_eq!(stokes_amplitude(t, &d), pump_amplitude(t, &c));
            prop_assert_eq!(cd_amplitude(t, &d), -cd_amplitude(t, &c));
            prop_assert!(pump_amplitude(t, &c) >= 0.0 && stokes_amplitude(t, &c) >= 0.0);
        }

        #[test]
        fn mixing_angle_is_monotone(a in -8.0f64..8.0, b in -8.0f64..8.0, tau in 0.01f64..1.5, width in 0.3f64..2.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let c = charge(Protocol::Stirap).with_pulse(1.0, width, tau);
            let d = discharge(Protocol::Stirap).with_pulse(1.0, width, tau);
            prop_assert!(mixing_angle(lo, &c) <= mixing_angle(hi, &c));
            prop_assert!(mixing_angle(lo, &d) >= mixing_angle(hi, &d));
            let theta = mixing_angle(lo, &c);
            prop_assert!((0.0..=FRAC_PI_2).contains(&theta));
        }
    }
}
