//! Hamiltonians of the driven Λ system and the adiabatic-frame transform.
//!
//! Bare basis ordering is `(|1⟩, |2⟩, |3⟩)`. In the adiabatic basis the
//! ordering is `(|−⟩, |0⟩, |+⟩)`, so the dark state is the middle row.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::pulses::{PulseSample, Spectrum};
use crate::C64;

pub type CMatrix3 = Matrix3<C64>;
pub type CVector3 = Vector3<C64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Energy eigenbasis `|1⟩, |2⟩, |3⟩`.
    Bare,
    /// Instantaneous eigenbasis `|−⟩, |0⟩, |+⟩`.
    Adiabatic,
}

/// A 3×3 complex operator tagged with the basis it is written in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operator3 {
    pub matrix: CMatrix3,
    pub basis: Basis,
}

impl Operator3 {
    pub fn bare(matrix: CMatrix3) -> Self {
        Operator3 { matrix, basis: Basis::Bare }
    }

    pub fn adiabatic(matrix: CMatrix3) -> Self {
        Operator3 { matrix, basis: Basis::Adiabatic }
    }

    pub fn zeros(basis: Basis) -> Self {
        Operator3 { matrix: CMatrix3::zeros(), basis }
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    /// Largest entry of `|H − H†|`.
    pub fn hermiticity_error(&self) -> f64 {
        (self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest off-diagonal magnitude.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    worst = worst.max(self.matrix[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &CVector3) -> CVector3 {
        self.matrix * v
    }
}

impl std::ops::Add for Operator3 {
    type Output = Operator3;

    fn add(self, rhs: Operator3) -> Operator3 {
        debug_assert_eq!(self.basis, rhs.basis, "adding operators in different bases");
        Operator3 { matrix: self.matrix + rhs.matrix, basis: self.basis }
    }
}

/// Bare-basis vector for a 1-based battery level.
pub fn level_vector(level: usize) -> CVector3 {
    assert!((1..=3).contains(&level), "level {level} out of range 1..=3");
    let mut v = CVector3::zeros();
    v[level - 1] = C64::new(1.0, 0.0);
    v
}

/// Free Hamiltonian `diag(ε₁, ε₂, ε₃)`.
pub fn h_bare(eps: &Spectrum) -> Operator3 {
    let [e1, e2, e3] = eps.levels();
    Operator3::bare(CMatrix3::from_diagonal(&CVector3::new(e1.into(), e2.into(), e3.into())))
}

/// Resonant pump/Stokes coupling, `½[[0, Ω_p, 0], [Ω_p, 0, Ω_s], [0, Ω_s, 0]]`.
pub fn h_stirap(pulse: &PulseSample) -> Operator3 {
    let p = C64::new(0.5 * pulse.omega_p, 0.0);
    let s = C64::new(0.5 * pulse.omega_s, 0.0);
    let z = C64::new(0.0, 0.0);
    Operator3::bare(CMatrix3::new(
        z, p, z, //
        p, z, s, //
        z, s, z,
    ))
}

/// Counterdiabatic coupling of levels 1 and 3: `(1,3) = ½Ω_cd e^{iφ}` plus its conjugate.
pub fn h_cd(pulse: &PulseSample) -> Operator3 {
    let c = C64::from_polar(0.5 * pulse.omega_cd, pulse.phase);
    let z = C64::new(0.0, 0.0);
    Operator3::bare(CMatrix3::new(
        z, z, c, //
        z, z, z, //
        c.conj(), z, z,
    ))
}

pub fn h_total(pulse: &PulseSample) -> Operator3 {
    h_stirap(pulse) + h_cd(pulse)
}

/// Dark state `cos θ|1⟩ − sin θ|3⟩`.
pub fn dark_state(theta: f64) -> CVector3 {
    let (s, c) = theta.sin_cos();
    CVector3::new(c.into(), C64::new(0.0, 0.0), (-s).into())
}

/// Instantaneous eigensystem of [`h_stirap`].
#[derive(Debug, Clone, PartialEq)]
pub struct Eigensystem3 {
    /// `(λ₋, λ₀, λ₊) = (−Ω/2, 0, +Ω/2)`.
    pub eigenvalues: [f64; 3],
    /// `|−⟩, |0⟩, |+⟩` in the bare basis.
    pub eigenvectors: [CVector3; 3],
    /// RMS Rabi amplitude `Ω`.
    pub rabi: f64,
    pub theta: f64,
}

impl Eigensystem3 {
    pub fn dark(&self) -> &CVector3 {
        &self.eigenvectors[1]
    }
}

/// Analytic eigenvectors
///
/// ```text
/// |−⟩ = (sin θ|1⟩ − |2⟩ + cos θ|3⟩)/√2
/// |0⟩ =  cos θ|1⟩        − sin θ|3⟩
/// |+⟩ = (sin θ|1⟩ + |2⟩ + cos θ|3⟩)/√2
/// ```
///
/// with eigenvalues `−Ω/2, 0, +Ω/2` (the half factor comes from the `½`
/// prefactor of [`h_stirap`]).
pub fn eigensystem(pulse: &PulseSample) -> Result<Eigensystem3> {
    let rabi = pulse.rabi();
    if rabi == 0.0 {
        return Err(Error::DegeneratePulse);
    }
    let theta = pulse.mixing_angle()?;
    let (s, c) = theta.sin_cos();
    let r = FRAC_1_SQRT_2;
    let minus = CVector3::new((r * s).into(), (-r).into(), (r * c).into());
    let plus = CVector3::new((r * s).into(), r.into(), (r * c).into());
    Ok(Eigensystem3 {
        eigenvalues: [-0.5 * rabi, 0.0, 0.5 * rabi],
        eigenvectors: [minus, dark_state(theta), plus],
        rabi,
        theta,
    })
}

/// Real orthogonal `U(θ)` whose rows are `⟨−|, ⟨0|, ⟨+|`; maps bare amplitudes
/// to adiabatic ones.
pub fn frame_transform(theta: f64) -> Operator3 {
    let (s, c) = theta.sin_cos();
    let r = FRAC_1_SQRT_2;
    Operator3::adiabatic(real3([
        [r * s, -r, r * c],
        [c, 0.0, -s],
        [r * s, r, r * c],
    ]))
}

/// `∂U/∂θ`.
fn frame_transform_derivative(theta: f64) -> CMatrix3 {
    let (s, c) = theta.sin_cos();
    let r = FRAC_1_SQRT_2;
    real3([
        [r * c, 0.0, -r * s],
        [-s, 0.0, -c],
        [r * c, 0.0, -r * s],
    ])
}

/// `H′ = U H U† + i (dU/dt) U†` with `dU/dt = (∂U/∂θ) θ̇`.
///
/// Off-diagonal entries equal `±(i/√2)(θ̇ − Ω_cd/2)`; they vanish when the
/// counterdiabatic field is `2θ̇`.
pub fn to_adiabatic_frame(pulse: &PulseSample, theta_rate: f64) -> Result<Operator3> {
    let theta = pulse.mixing_angle()?;
    let u = frame_transform(theta).matrix;
    let u_dag = u.adjoint();
    let du = frame_transform_derivative(theta) * C64::new(0.0, theta_rate);
    let h = h_total(pulse).matrix;
    Ok(Operator3::adiabatic(u * h * u_dag + du * u_dag))
}

fn real3(rows: [[f64; 3]; 3]) -> CMatrix3 {
    CMatrix3::from_fn(|i, j| C64::new(rows[i][j], 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulses::{mixing_angle_rate, sample, Direction, Protocol, ProtocolConfig};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pulse(p: f64, s: f64, cd: f64) -> PulseSample {
        PulseSample { omega_p: p, omega_s: s, omega_cd: cd, phase: FRAC_PI_2 }
    }

    fn hermitian_eigenvalues(op: &Operator3) -> Vec<f64> {
        let mut ev: Vec<f64> = op.matrix.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    #[test]
    fn h_stirap_examples() {
        assert_eq!(h_stirap(&pulse(0.0, 0.0, 0.0)).matrix, CMatrix3::zeros());

        let h = h_stirap(&pulse(1.0, 0.0, 0.0));
        for i in 0..3 {
            for j in 0..3 {
                let expect = if (i, j) == (0, 1) || (i, j) == (1, 0) { 0.5 } else { 0.0 };
                assert_eq!(h.entry(i, j), c(expect, 0.0));
            }
        }

        let a = 0.612626394184416;
        let ev = hermitian_eigenvalues(&h_stirap(&pulse(a, a, 0.0)));
        let expect = [-0.4331922776616635, 0.0, 0.4331922776616635];
        for (got, want) in ev.iter().zip(expect) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn h_cd_examples() {
        assert_eq!(h_cd(&pulse(0.3, 0.4, 0.0)).max_abs(), 0.0);

        let h = h_cd(&pulse(0.0, 0.0, 2.8));
        assert_abs_diff_eq!(h.entry(0, 2).re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h.entry(0, 2).im, 1.4, epsilon = 1e-15);
        assert_abs_diff_eq!(h.entry(2, 0).im, -1.4, epsilon = 1e-15);
        assert_eq!(h.entry(1, 1), c(0.0, 0.0));

        let h = h_cd(&pulse(0.0, 0.0, -2.8));
        assert_abs_diff_eq!(h.entry(0, 2).im, -1.4, epsilon = 1e-15);
    }

    #[test]
    fn h_total_examples() {
        let stirap = sample(0.0, &ProtocolConfig::new(Protocol::Stirap, Direction::Charge));
        assert_eq!(h_total(&stirap), h_stirap(&stirap));

        let cd = sample(0.0, &ProtocolConfig::new(Protocol::CdStirap, Direction::Charge));
        let expect = h_stirap(&cd).matrix + h_cd(&cd).matrix;
        assert_eq!(h_total(&cd).matrix, expect);
        assert_abs_diff_eq!(h_total(&cd).entry(0, 2).im, 1.4, epsilon = 1e-15);

        assert_eq!(h_total(&pulse(0.0, 0.0, 0.0)).max_abs(), 0.0);
    }

    #[test]
    fn h_bare_is_diagonal_spectrum() {
        let h = h_bare(&Spectrum::default());
        assert_eq!(h.entry(2, 2), c(1.95, 0.0));
        assert_eq!(h.max_off_diagonal(), 0.0);
    }

    #[test]
    fn eigensystem_dark_state_limits() {
        let es = eigensystem(&pulse(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(es.theta, 0.0);
        assert_eq!(*es.dark(), level_vector(1));

        let es = eigensystem(&pulse(1.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(es.theta, FRAC_PI_2);
        assert_abs_diff_eq!(es.dark()[2].re, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(es.dark()[2].norm_sqr(), 1.0, epsilon = 1e-15);

        assert_eq!(eigensystem(&pulse(0.0, 0.0, 0.0)), Err(Error::DegeneratePulse));
    }

    #[test]
    fn eigensystem_satisfies_eigen_equation() {
        let p = pulse(1.0, 1.0, 0.0);
        let es = eigensystem(&p).unwrap();
        let h = h_stirap(&p);
        let half_root2 = std::f64::consts::SQRT_2 / 2.0;
        assert_abs_diff_eq!(es.eigenvalues[2], half_root2, epsilon = 1e-15);
        for (v, lambda) in es.eigenvectors.iter().zip(es.eigenvalues) {
            let residual = (h.apply(v) - v * C64::from(lambda)).norm();
            assert!(residual < 1e-12, "residual {residual}");
        }
        assert!(h.apply(es.dark()).norm() < 1e-15);
    }

    #[test]
    fn frame_transform_examples() {
        let u = frame_transform(0.0).matrix;
        let r = FRAC_1_SQRT_2;
        let rows = [[0.0, -r, r], [1.0, 0.0, 0.0], [0.0, r, r]];
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(u[(i, j)].re, rows[i][j], epsilon = 1e-15);
            }
        }
        let u = frame_transform(FRAC_PI_4).matrix;
        assert_abs_diff_eq!(u[(0, 0)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(u[(0, 1)].re, -r, epsilon = 1e-15);
        assert_abs_diff_eq!(u[(0, 2)].re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn frame_rows_are_eigenvectors() {
        let p = pulse(0.7, 0.3, 0.0);
        let es = eigensystem(&p).unwrap();
        let u = frame_transform(es.theta).matrix;
        for (k, v) in es.eigenvectors.iter().enumerate() {
            for j in 0..3 {
                assert_abs_diff_eq!(u[(k, j)].re, v[j].re, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn adiabatic_frame_decouples_with_cd() {
        let cfg = ProtocolConfig::new(Protocol::CdStirap, Direction::Charge);
        for k in 0..=200 {
            let t = cfg.t_start + (cfg.t_end - cfg.t_start) * k as f64 / 200.0;
            let p = sample(t, &cfg);
            let h = to_adiabatic_frame(&p, mixing_angle_rate(t, &cfg)).unwrap();
            assert!(h.max_off_diagonal() < 1e-10 * p.rabi(), "t = {t}");
            assert_eq!(h.basis, Basis::Adiabatic);
        }
    }

    #[test]
    fn adiabatic_frame_structure_without_cd() {
        // θ̇ = 1.4, Ω_cd = 0: off-diagonals ±i θ̇/√2 at (1,2), (2,1), (2,3), (3,2)
        let p = pulse(0.8, 0.5, 0.0);
        let h = to_adiabatic_frame(&p, 1.4).unwrap();
        let m = 1.4 * FRAC_1_SQRT_2;
        assert_abs_diff_eq!(h.entry(0, 1).im, m, epsilon = 1e-14);
        assert_abs_diff_eq!(h.entry(1, 0).im, -m, epsilon = 1e-14);
        assert_abs_diff_eq!(h.entry(1, 2).im, -m, epsilon = 1e-14);
        assert_abs_diff_eq!(h.entry(2, 1).im, m, epsilon = 1e-14);
        assert!(h.entry(0, 2).norm() < 1e-14);
        for (i, j) in [(0, 1), (1, 0), (1, 2), (2, 1)] {
            assert_abs_diff_eq!(h.entry(i, j).norm(), 0.9899494936611666, epsilon = 1e-14);
        }
    }

    #[test]
    fn adiabatic_frame_diagonal_ignores_cd() {
        for cd in [0.0, 0.9, -2.0] {
            let p = pulse(0.8, 0.5, cd);
            let h = to_adiabatic_frame(&p, 0.37).unwrap();
            let half = 0.5 * p.rabi();
            assert_abs_diff_eq!(h.entry(0, 0).re, -half, epsilon = 1e-14);
            assert_abs_diff_eq!(h.entry(1, 1).re, 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(h.entry(2, 2).re, half, epsilon = 1e-14);
        }
    }

    proptest! {
        #[test]
        fn builders_are_hermitian(p in 0.0f64..5.0, s in 0.0f64..5.0, cd in -5.0f64..5.0, phase in -3.2f64..3.2) {
            let pulse = PulseSample { omega_p: p, omega_s: s, omega_cd: cd, phase };
            let scale = p.max(s).max(cd.abs()).max(1.0);
            for h in [h_stirap(&pulse), h_cd(&pulse), h_total(&pulse)] {
                prop_assert!(h.hermiticity_error() <= 1e-14 * scale);
            }
        }

        #[test]
        fn eigenvectors_orthonormal(p in 0.01f64..5.0, s in 0.01f64..5.0) {
            let pulse = pulse(p, s, 0.0);
            let es = eigensystem(&pulse).unwrap();
            let h = h_stirap(&pulse);
            for i in 0..3 {
                for j in 0..3 {
                    let g = es.eigenvectors[i].dotc(&es.eigenvectors[j]);
                    let id = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((g - C64::from(id)).norm() < 1e-12);
                }
                let v = &es.eigenvectors[i];
                let r = (h.apply(v) - v * C64::from(es.eigenvalues[i])).norm();
                prop_assert!(r < 1e-10 * es.rabi);
            }
            prop_assert_eq!(es.eigenvalues[1], 0.0);
            prop_assert_eq!(es.eigenvalues[0], -es.eigenvalues[2]);
        }

        #[test]
        fn frame_transform_is_unitary(theta in -7.0f64..7.0) {
            let u = frame_transform(theta).matrix;
            let err = (u * u.adjoint() - CMatrix3::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assert!(err < 1e-12);
        }

        #[test]
        fn similarity_preserves_spectrum(p in 0.01f64..3.0, s in 0.01f64..3.0, cd in -3.0f64..3.0) {
            let pulse = pulse(p, s, cd);
            let framed = to_adiabatic_frame(&pulse, 0.0).unwrap();
            prop_assert!(framed.hermiticity_error() < 1e-13);
            let a = hermitian_eigenvalues(&framed);
            let b = hermitian_eigenvalues(&h_total(&pulse));
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }

        #[test]
        fn frame_is_hermitian_with_rate(p in 0.01f64..3.0, s in 0.01f64..3.0, rate in -3.0f64..3.0) {
            let framed = to_adiabatic_frame(&pulse(p, s, 2.0 * rate), rate).unwrap();
            prop_assert!(framed.hermiticity_error() < 1e-13);
            prop_assert!(framed.entry(1, 0).norm() < 1e-10 * p.hypot(s).max(1.0));
            prop_assert!(framed.entry(1, 2).norm() < 1e-10 * p.hypot(s).max(1.0));
        }
    }
}
