//! Physical design of the coupled system.
//!
//! `N` identical oscillators (mass `m`, spring `k`) are attached to a big
//! oscillator (mass `M`, spring `K` to the support). The big oscillator only
//! sees the center of mass `x̄`, so the dynamics split into
//!
//! * a coupled 2×2 block over `(X, x̄)` with frequencies `ω±`,
//! * the `N − 1` difference modes `xᵢ − x̄`, all at `ω_t = √(k/m)`. One of them
//!   is the target mode `e_t`; the remaining `N − 2` never interact with the
//!   rest and are kept only as a remainder vector.
//!
//! Mass-weighted coordinates `Y = √M·X`, `ȳ = √(Nm)·x̄` make the kinetic
//! energy of the coupled block `½(Ẏ² + ȳ̇²)`, so unit eigenvectors give
//! additive modal energies.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::classical::SystemState;
use crate::error::{domain, Error, Result};

/// Parameter families that make the coupled frequencies rational multiples of `ω_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `ω₊ = (2p+1)/2`, `ω₋ = 1/2`; tap every `2π`.
    CaseOne,
    /// `ω₊ = 2p`, `ω₋ = 0` (free big oscillator); tap every `π`.
    CaseTwo,
    /// Arbitrary masses and springs.
    Custom,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::CaseOne => "case-one",
            Family::CaseTwo => "case-two",
            Family::Custom => "custom",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    pub n: usize,
    pub m: f64,
    pub k: f64,
    pub big_mass: f64,
    pub big_spring: f64,
    pub family: Family,
    /// Family parameter; `None` for [`Family::Custom`].
    pub p: Option<u32>,
}

impl OscillatorParams {
    /// Arbitrary design, no family constraint.
    pub fn custom(n: usize, m: f64, k: f64, big_mass: f64, big_spring: f64) -> Result<Self> {
        let params = Self {
            n,
            m,
            k,
            big_mass,
            big_spring,
            family: Family::Custom,
            p: None,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return domain(format!("need at least 2 small oscillators, got {}", self.n));
        }
        check_positive("m", self.m)?;
        check_positive("k", self.k)?;
        check_positive("big_mass", self.big_mass)?;
        if !(self.big_spring >= 0.0 && self.big_spring.is_finite()) {
            return domain(format!("big_spring must be >= 0, got {}", self.big_spring));
        }
        match (self.family, self.p) {
            (Family::Custom, _) => Ok(()),
            (_, None) | (_, Some(0)) => domain("family parameter p must be >= 1"),
            (family, Some(p)) => {
                let expected = solve_family(family, p, self.n, self.m, self.k)?;
                let rel = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
                if rel(self.big_mass, expected.big_mass)
                    && rel(self.big_spring, expected.big_spring)
                {
                    Ok(())
                } else {
                    domain(format!(
                        "{family} with p={p} requires M={} and K={}",
                        expected.big_mass, expected.big_spring
                    ))
                }
            }
        }
    }

    /// Natural frequency of an isolated small oscillator, `√(k/m)`.
    pub fn omega_t(&self) -> f64 {
        (self.k / self.m).sqrt()
    }

    /// Clock interval between oracle taps, if the family defines one.
    pub fn tap_interval(&self) -> Option<f64> {
        use std::f64::consts::PI;
        match self.family {
            Family::CaseOne => Some(2.0 * PI / self.omega_t()),
            Family::CaseTwo => Some(PI / self.omega_t()),
            Family::Custom => None,
        }
    }

    /// Total mass of the assembly.
    pub fn total_mass(&self) -> f64 {
        self.big_mass + self.n as f64 * self.m
    }
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        domain(format!("{name} must be positive, got {value}"))
    }
}

/// Closed-form masses and springs for the rational-frequency families.
pub fn solve_family(family: Family, p: u32, n: usize, m: f64, k: f64) -> Result<OscillatorParams> {
    if p == 0 {
        return domain("family parameter p must be >= 1");
    }
    if n < 2 {
        return domain(format!("need at least 2 small oscillators, got {n}"));
    }
    check_positive("m", m)?;
    check_positive("k", k)?;
    let nf = n as f64;
    let pf = p as f64;
    let (big_mass, big_spring) = match family {
        Family::CaseOne => {
            let denom = 3.0 * (2.0 * pf + 3.0) * (2.0 * pf - 1.0);
            (
                16.0 * nf * m / denom,
                (2.0 * pf + 1.0).powi(2) * nf * k / denom,
            )
        }
        Family::CaseTwo => (nf * m / ((2.0 * pf + 1.0) * (2.0 * pf - 1.0)), 0.0),
        Family::Custom => return domain("custom designs are built with OscillatorParams::custom"),
    };
    Ok(OscillatorParams {
        n,
        m,
        k,
        big_mass,
        big_spring,
        family,
        p: Some(p),
    })
}

/// Frequencies and mass-weighted eigenvectors of the coupled block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub omega_t: f64,
    /// Unit eigenvector over `(Y, ȳ)` for `ω₊`.
    pub eigenvector_plus: [f64; 2],
    /// Unit eigenvector over `(Y, ȳ)` for `ω₋`.
    pub eigenvector_minus: [f64; 2],
}

impl Spectrum {
    /// Spectrum for raw parameters. Accepts `n = 1`, where the target mode is
    /// absent but the coupled block is still well defined.
    pub fn compute(n: usize, m: f64, k: f64, big_mass: f64, big_spring: f64) -> Result<Self> {
        if n == 0 {
            return domain("need at least one small oscillator");
        }
        check_positive("m", m)?;
        check_positive("k", k)?;
        check_positive("big_mass", big_mass)?;
        if !(big_spring >= 0.0) {
            return domain("big_spring must be >= 0");
        }
        let nf = n as f64;
        // Dynamical matrix [[a, c], [c, d]] in mass-weighted coordinates.
        let a = (big_spring + nf * k) / big_mass;
        let c = -k * nf.sqrt() / (big_mass * m).sqrt();
        let d = k / m;
        let half_trace = 0.5 * (a + d);
        // a·d − c² simplified; exact zero for a free big oscillator.
        let det = big_spring * k / (big_mass * m);
        let disc = (half_trace * half_trace - det).max(0.0).sqrt();
        let lambda_plus = half_trace + disc;
        // Product form avoids cancellation when det is small.
        let lambda_minus = (det / lambda_plus).max(0.0);
        let eigvec = |lambda: f64| {
            let v = [d - lambda, -c];
            let norm = v[0].hypot(v[1]);
            [v[0] / norm, v[1] / norm]
        };
        Ok(Self {
            omega_plus: lambda_plus.sqrt(),
            omega_minus: lambda_minus.sqrt(),
            omega_t: d.sqrt(),
            eigenvector_plus: eigvec(lambda_plus),
            eigenvector_minus: eigvec(lambda_minus),
        })
    }

    /// True when `ω₋` vanishes and `e₋` is a free translation.
    pub fn has_translation_mode(&self) -> bool {
        self.omega_minus == 0.0
    }
}

pub fn spectrum(params: &OscillatorParams) -> Spectrum {
    Spectrum::compute(
        params.n,
        params.m,
        params.k,
        params.big_mass,
        params.big_spring,
    )
    .expect("validated parameters always have a spectrum")
}

/// Position and velocity of one normal-mode coordinate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ModeCoordinate {
    pub position: f64,
    pub velocity: f64,
}

impl ModeCoordinate {
    pub fn energy(&self, omega: f64) -> f64 {
        0.5 * (self.velocity * self.velocity + omega * omega * self.position * self.position)
    }

    /// Free evolution at `omega`; linear drift for `omega = 0`.
    pub fn advance(&self, omega: f64, dt: f64) -> Self {
        if omega == 0.0 {
            return Self {
                position: self.position + self.velocity * dt,
                velocity: self.velocity,
            };
        }
        let (s, c) = (omega * dt).sin_cos();
        Self {
            position: self.position * c + self.velocity * s / omega,
            velocity: self.velocity * c - self.position * omega * s,
        }
    }
}

/// Coordinates of the three coupled modes `{e₊, e₋, e_t}` plus the energy
/// held by the decoupled subspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalState {
    pub time: f64,
    pub target: usize,
    pub plus: ModeCoordinate,
    pub minus: ModeCoordinate,
    pub target_mode: ModeCoordinate,
    pub decoupled_energy: f64,
}

impl ModalState {
    pub fn coupled_energy(&self, spectrum: &Spectrum) -> f64 {
        self.plus.energy(spectrum.omega_plus)
            + self.minus.energy(spectrum.omega_minus)
            + self.target_mode.energy(spectrum.omega_t)
    }

    pub fn total_energy(&self, spectrum: &Spectrum) -> f64 {
        self.coupled_energy(spectrum) + self.decoupled_energy
    }
}

/// Physical-coordinate remainder orthogonal to `1` and to the target
/// direction: the content of the `N − 2` decoupled modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoupledSnapshot {
    pub pos: Vec<f64>,
    pub vel: Vec<f64>,
}

impl DecoupledSnapshot {
    pub fn zeros(n: usize) -> Self {
        Self {
            pos: vec![0.0; n],
            vel: vec![0.0; n],
        }
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

fn check_state(params: &OscillatorParams, state: &SystemState, target: usize) -> Result<()> {
    check_len(params.n, state.pos.len())?;
    check_len(params.n, state.vel.len())?;
    if target >= params.n {
        return domain(format!(
            "target {target} out of range for {} oscillators",
            params.n
        ));
    }
    Ok(())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Norm of the projection of the unit vector at the target onto the
/// zero-mean subspace, `√((N−1)/N)`.
fn target_direction_norm(n: usize) -> f64 {
    ((n as f64 - 1.0) / n as f64).sqrt()
}

/// Splits a physical state into modal coordinates and the decoupled remainder.
pub fn decompose(
    params: &OscillatorParams,
    state: &SystemState,
    target: usize,
) -> Result<(ModalState, DecoupledSnapshot)> {
    check_state(params, state, target)?;
    let n = params.n;
    let nf = n as f64;
    let eig = spectrum(params);
    let sqrt_big = params.big_mass.sqrt();
    let sqrt_cm = (nf * params.m).sqrt();

    let xbar = mean(&state.pos);
    let vbar = mean(&state.vel);
    let y = [sqrt_big * state.big_pos, sqrt_cm * xbar];
    let ydot = [sqrt_big * state.big_vel, sqrt_cm * vbar];
    let project = |v: &[f64; 2], w: &[f64; 2]| v[0] * w[0] + v[1] * w[1];
    let plus = ModeCoordinate {
        position: project(&eig.eigenvector_plus, &y),
        velocity: project(&eig.eigenvector_plus, &ydot),
    };
    let minus = ModeCoordinate {
        position: project(&eig.eigenvector_minus, &y),
        velocity: project(&eig.eigenvector_minus, &ydot),
    };

    // Difference coordinates yᵢ = xᵢ − x̄ and their projection on the target direction û.
    let norm_u = target_direction_norm(n);
    let dev_pos: Vec<f64> = state.pos.iter().map(|x| x - xbar).collect();
    let dev_vel: Vec<f64> = state.vel.iter().map(|v| v - vbar).collect();
    let along_pos = dev_pos[target] / norm_u;
    let along_vel = dev_vel[target] / norm_u;
    let unit_u = |i: usize| {
        let e = if i == target { 1.0 } else { 0.0 };
        (e - 1.0 / nf) / norm_u
    };
    let rest_pos: Vec<f64> = (0..n).map(|i| dev_pos[i] - along_pos * unit_u(i)).collect();
    let rest_vel: Vec<f64> = (0..n).map(|i| dev_vel[i] - along_vel * unit_u(i)).collect();

    let sqrt_m = params.m.sqrt();
    let decoupled_energy = 0.5 * params.m * rest_vel.iter().map(|v| v * v).sum::<f64>()
        + 0.5 * params.k * rest_pos.iter().map(|x| x * x).sum::<f64>();
    let modal = ModalState {
        time: state.time,
        target,
        plus,
        minus,
        target_mode: ModeCoordinate {
            position: sqrt_m * along_pos,
            velocity: sqrt_m * along_vel,
        },
        decoupled_energy,
    };
    Ok((
        modal,
        DecoupledSnapshot {
            pos: rest_pos,
            vel: rest_vel,
        },
    ))
}

/// Modal coordinates of a physical state.
pub fn to_modal(
    params: &OscillatorParams,
    state: &SystemState,
    target: usize,
) -> Result<ModalState> {
    decompose(params, state, target).map(|(modal, _)| modal)
}

/// Inverse of [`decompose`].
pub fn from_modal(
    params: &OscillatorParams,
    modal: &ModalState,
    decoupled: &DecoupledSnapshot,
) -> Result<SystemState> {
    params.validate()?;
    let n = params.n;
    check_len(n, decoupled.pos.len())?;
    check_len(n, decoupled.vel.len())?;
    if modal.target >= n {
        return domain(format!(
            "target {} out of range for {n} oscillators",
            modal.target
        ));
    }
    let nf = n as f64;
    let eig = spectrum(params);
    let sqrt_big = params.big_mass.sqrt();
    let sqrt_cm = (nf * params.m).sqrt();
    let (vp, vm) = (eig.eigenvector_plus, eig.eigenvector_minus);
    let combine = |qp: f64, qm: f64| [qp * vp[0] + qm * vm[0], qp * vp[1] + qm * vm[1]];
    let y = combine(modal.plus.position, modal.minus.position);
    let ydot = combine(modal.plus.velocity, modal.minus.velocity);
    let xbar = y[1] / sqrt_cm;
    let vbar = ydot[1] / sqrt_cm;

    let norm_u = target_direction_norm(n);
    let sqrt_m = params.m.sqrt();
    let along_pos = modal.target_mode.position / sqrt_m;
    let along_vel = modal.target_mode.velocity / sqrt_m;
    let unit_u = |i: usize| {
        let e = if i == modal.target { 1.0 } else { 0.0 };
        (e - 1.0 / nf) / norm_u
    };
    Ok(SystemState {
        time: modal.time,
        big_pos: y[0] / sqrt_big,
        big_vel: ydot[0] / sqrt_big,
        pos: (0..n)
            .map(|i| xbar + along_pos * unit_u(i) + decoupled.pos[i])
            .collect(),
        vel: (0..n)
            .map(|i| vbar + along_vel * unit_u(i) + decoupled.vel[i])
            .collect(),
    })
}

/// Total mechanical energy in physical coordinates.
pub fn total_energy(params: &OscillatorParams, state: &SystemState) -> f64 {
    let big = 0.5 * params.big_mass * state.big_vel * state.big_vel
        + 0.5 * params.big_spring * state.big_pos * state.big_pos;
    let small: f64 = state
        .pos
        .iter()
        .zip(&state.vel)
        .map(|(x, v)| {
            let ext = x - state.big_pos;
            0.5 * params.m * v * v + 0.5 * params.k * ext * ext
        })
        .sum();
    big + small
}

/// Energy of small oscillator `i`: kinetic plus spring energy.
pub fn oscillator_energy(params: &OscillatorParams, state: &SystemState, i: usize) -> f64 {
    let ext = state.pos[i] - state.big_pos;
    0.5 * params.m * state.vel[i] * state.vel[i] + 0.5 * params.k * ext * ext
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn family_closed_forms() {
        let one = solve_family(Family::CaseOne, 1, 16, 1.0, 1.0).unwrap();
        assert!(close(one.big_mass, 256.0 / 15.0, 1e-12));
        assert!(close(one.big_spring, 9.6, 1e-12));

        let two = solve_family(Family::CaseTwo, 1, 4, 1.0, 1.0).unwrap();
        assert!(close(two.big_mass, 4.0 / 3.0, 1e-12));
        assert_eq!(two.big_spring, 0.0);

        let two = solve_family(Family::CaseTwo, 2, 15, 1.0, 1.0).unwrap();
        assert!(close(two.big_mass, 1.0, 1e-12));
    }

    #[test]
    fn family_rejects_p_zero() {
        assert!(matches!(
            solve_family(Family::CaseOne, 0, 4, 1.0, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(solve_family(Family::CaseTwo, 0, 4, 1.0, 1.0).is_err());
        assert!(solve_family(Family::CaseTwo, 1, 1, 1.0, 1.0).is_err());
    }

    #[test]
    fn validate_catches_inconsistent_family() {
        let mut params = solve_family(Family::CaseTwo, 1, 4, 1.0, 1.0).unwrap();
        assert!(params.validate().is_ok());
        params.big_mass = 2.0;
        assert!(params.validate().is_err());
        assert!(OscillatorParams::custom(4, 1.0, 1.0, -1.0, 0.0).is_err());
        assert!(OscillatorParams::custom(4, 1.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn family_spectra() {
        let s = spectrum(&solve_family(Family::CaseOne, 1, 16, 1.0, 1.0).unwrap());
        assert!(close(s.omega_plus, 1.5, 1e-12));
        assert!(close(s.omega_minus, 0.5, 1e-12));
        assert_eq!(s.omega_t, 1.0);

        let s = spectrum(&solve_family(Family::CaseTwo, 1, 4, 1.0, 1.0).unwrap());
        assert!(close(s.omega_plus, 2.0, 1e-12));
        assert_eq!(s.omega_minus, 0.0);
        assert!(s.has_translation_mode());
    }

    #[test]
    fn custom_single_oscillator_spectrum() {
        let s = Spectrum::compute(1, 1.0, 1.0, 1.0, 1.0).unwrap();
        let root5 = 5f64.sqrt();
        assert!(close(s.omega_plus.powi(2), (3.0 + root5) / 2.0, 1e-12));
        assert!(close(s.omega_minus.powi(2), (3.0 - root5) / 2.0, 1e-12));
    }

    #[test]
    fn eigenvectors_match_unnormalized_form() {
        // With m = k = 1 the eigenvector is ∝ (1 − ω², √(N/M)).
        let params = solve_family(Family::CaseOne, 2, 9, 1.0, 1.0).unwrap();
        let s = spectrum(&params);
        let ratio = (params.n as f64 / params.big_mass).sqrt();
        for (omega, v) in [
            (s.omega_plus, s.eigenvector_plus),
            (s.omega_minus, s.eigenvector_minus),
        ] {
            let raw = [1.0 - omega * omega, ratio];
            let cross = raw[0] * v[1] - raw[1] * v[0];
            assert!(cross.abs() < 1e-12);
        }
        let dot = s.eigenvector_plus[0] * s.eigenvector_minus[0]
            + s.eigenvector_plus[1] * s.eigenvector_minus[1];
        assert!(dot.abs() < 1e-14);
    }

    #[test]
    fn units_scale_frequencies() {
        let params = solve_family(Family::CaseOne, 1, 8, 2.0, 8.0).unwrap();
        let s = spectrum(&params);
        assert!(close(s.omega_t, 2.0, 1e-15));
        assert!(close(s.omega_plus, 3.0, 1e-12));
        assert!(close(s.omega_minus, 1.0, 1e-12));
        assert!(close(
            params.tap_interval().unwrap(),
            std::f64::consts::PI,
            1e-15
        ));
    }

    fn uniform(params: &OscillatorParams, a: f64) -> SystemState {
        SystemState {
            time: 0.0,
            big_pos: 0.0,
            big_vel: 0.0,
            pos: vec![0.0; params.n],
            vel: vec![a; params.n],
        }
    }

    #[test]
    fn modal_uniform_start() {
        let params = solve_family(Family::CaseTwo, 1, 4, 1.0, 1.0).unwrap();
        let modal = to_modal(&params, &uniform(&params, 1.0), 2).unwrap();
        assert_eq!(modal.target_mode, ModeCoordinate::default());
        assert!(modal.decoupled_energy.abs() < 1e-30);

        let zero = to_modal(&params, &uniform(&params, 0.0), 0).unwrap();
        assert_eq!(zero.plus, ModeCoordinate::default());
        assert_eq!(zero.minus, ModeCoordinate::default());
        assert_eq!(zero.target_mode, ModeCoordinate::default());
    }

    #[test]
    fn modal_dimension_errors() {
        let params = solve_family(Family::CaseTwo, 1, 4, 1.0, 1.0).unwrap();
        let mut state = uniform(&params, 1.0);
        state.vel.pop();
        assert!(matches!(
            to_modal(&params, &state, 0),
            Err(Error::DimensionMismatch {
                expected: 4,
                found: 3
            })
        ));
        let modal = to_modal(&params, &uniform(&params, 1.0), 0).unwrap();
        assert!(from_modal(&params, &modal, &DecoupledSnapshot::zeros(3)).is_err());
    }

    #[test]
    fn from_modal_zero_and_uniform() {
        let params = solve_family(Family::CaseOne, 1, 16, 1.0, 1.0).unwrap();
        let zero = ModalState {
            time: 0.0,
            target: 3,
            plus: ModeCoordinate::default(),
            minus: ModeCoordinate::default(),
            target_mode: ModeCoordinate::default(),
            decoupled_energy: 0.0,
        };
        let state = from_modal(&params, &zero, &DecoupledSnapshot::zeros(16)).unwrap();
        assert!(state.pos.iter().chain(&state.vel).all(|&v| v == 0.0));
        assert_eq!(state.big_pos, 0.0);

        let start = uniform(&params, 1.0);
        let (modal, rest) = decompose(&params, &start, 3).unwrap();
        let back = from_modal(&params, &modal, &rest).unwrap();
        assert!(back.vel.iter().all(|&v| close(v, 1.0, 1e-12)));
        assert!(back.big_vel.abs() < 1e-12);
    }

    #[test]
    fn target_mode_excitation() {
        let params = solve_family(Family::CaseTwo, 1, 5, 1.0, 1.0).unwrap();
        let modal = ModalState {
            time: 0.0,
            target: 1,
            plus: ModeCoordinate::default(),
            minus: ModeCoordinate::default(),
            target_mode: ModeCoordinate {
                position: 0.7,
                velocity: -0.2,
            },
            decoupled_energy: 0.0,
        };
        let state = from_modal(&params, &modal, &DecoupledSnapshot::zeros(5)).unwrap();
        let xbar = mean(&state.pos);
        assert!(xbar.abs() < 1e-15);
        assert!((state.pos[1] - xbar).abs() > 0.1);
        let others = state.pos[0];
        assert!(state
            .pos
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != 1)
            .all(|(_, &x)| close(x, others, 1e-15)));
    }
}
