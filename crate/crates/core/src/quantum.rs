//! Coherent-state layer.
//!
//! A coherent state `|α⟩` of an oscillator with frequency `ω` and mass `m`
//! is a minimal-spread Gaussian whose center follows the classical orbit,
//! `⟨x⟩/2Δx + i⟨p⟩/2Δp = α`. The tapped oscillator lives in the
//! half-harmonic well (wall at `x = 0`); its state is built with the method
//! of images, `C(|α⟩ − |−α⟩)` with `C = (1 − e^{−2|α|²})^{−1/2}`, restricted
//! to `x ≤ 0`.
//!
//! The global phase `e^{−iωt/2}` and the reflection signs are collected in a
//! separate accumulator; sampled wavefunctions never include it.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classical::SystemState;
use crate::error::{domain, Result};
use crate::oscillator::OscillatorParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentState {
    pub alpha: Complex64,
    pub omega: f64,
    pub mass: f64,
    pub hbar: f64,
    /// Image superposition active (state lives in the half-well).
    pub tapped: bool,
    /// Accumulated global phase, including the `−1` from each reflection.
    pub phase: Complex64,
}

impl CoherentState {
    pub fn new(alpha: Complex64, omega: f64, mass: f64, hbar: f64) -> Result<Self> {
        for (name, v) in [("omega", omega), ("mass", mass), ("hbar", hbar)] {
            if !(v > 0.0 && v.is_finite()) {
                return domain(format!("{name} must be positive, got {v}"));
            }
        }
        if !(alpha.re.is_finite() && alpha.im.is_finite()) {
            return domain("alpha must be finite");
        }
        Ok(Self {
            alpha,
            omega,
            mass,
            hbar,
            tapped: false,
            phase: Complex64::new(1.0, 0.0),
        })
    }

    /// Natural units `ω = m = ħ = 1`.
    pub fn natural(alpha: Complex64) -> Result<Self> {
        Self::new(alpha, 1.0, 1.0, 1.0)
    }

    pub fn delta_x(&self) -> f64 {
        (self.hbar / (2.0 * self.mass * self.omega)).sqrt()
    }

    pub fn delta_p(&self) -> f64 {
        (self.mass * self.hbar * self.omega / 2.0).sqrt()
    }

    /// Center of the `|α⟩` component.
    pub fn center_x(&self) -> f64 {
        2.0 * self.delta_x() * self.alpha.re
    }

    /// Momentum of the `|α⟩` component.
    pub fn center_p(&self) -> f64 {
        2.0 * self.delta_p() * self.alpha.im
    }

    /// Image normalization `C = (1 − e^{−2|α|²})^{−1/2}`.
    pub fn image_normalization(&self) -> f64 {
        let a2 = self.alpha.norm_sqr();
        1.0 / (-(-2.0 * a2).exp_m1()).sqrt()
    }

    /// Analytic expectations on the full line (untapped), or on the half-line
    /// far from the wall (tapped), where the physical packet is the one with
    /// negative center.
    pub fn classical_track(&self) -> (f64, f64) {
        if self.tapped && self.center_x() > 0.0 {
            (-self.center_x(), -self.center_p())
        } else {
            (self.center_x(), self.center_p())
        }
    }

    /// `ψ(x)` without the global phase.
    pub fn psi_at(&self, x: f64) -> Complex64 {
        let direct = self.gaussian(self.alpha, x);
        if self.tapped {
            (direct - self.gaussian(-self.alpha, x)) * self.image_normalization()
        } else {
            direct
        }
    }

    fn gaussian(&self, alpha: Complex64, x: f64) -> Complex64 {
        let dx = self.delta_x();
        let center = 2.0 * dx * alpha.re;
        let momentum = 2.0 * self.delta_p() * alpha.im;
        let amplitude = (self.mass * self.omega / (PI * self.hbar)).powf(0.25);
        let u = (x - center) / (2.0 * dx);
        let arg = Complex64::new(-u * u, x * momentum / self.hbar - alpha.re * alpha.im);
        amplitude * arg.exp()
    }
}

/// Free evolution: `α ↦ α·e^{−iωt}` (both image components rotate together);
/// the accumulator picks up `e^{−iωt/2}`.
pub fn evolve_coherent(state: &CoherentState, dt: f64) -> CoherentState {
    let rotation = Complex64::from_polar(1.0, -state.omega * dt);
    CoherentState {
        alpha: state.alpha * rotation,
        phase: state.phase * Complex64::from_polar(1.0, -0.5 * state.omega * dt),
        ..*state
    }
}

/// The tapping oracle for coherent states.
///
/// The first tap switches on the image superposition. Later taps exchange
/// `|α⟩ ↔ |−α⟩`, reversing `⟨x⟩` and `⟨p⟩` of the primary component and
/// multiplying the accumulator by `−1`.
pub fn tap_coherent(state: &CoherentState) -> Result<CoherentState> {
    if state.alpha == Complex64::new(0.0, 0.0) {
        return domain("image construction is singular at alpha = 0");
    }
    Ok(if state.tapped {
        CoherentState {
            alpha: -state.alpha,
            phase: -state.phase,
            ..*state
        }
    } else {
        CoherentState {
            tapped: true,
            ..*state
        }
    })
}

/// Evolution inside the half-well. Every time the primary `α` passes the
/// positive real axis (the packet reaching its far turning point on the
/// image side) the components are exchanged, so the primary always returns
/// to the physical side carrying the reflection sign. With `α₀ = −a` the
/// first exchange lands at `t = π/ω`.
pub fn evolve_in_half_well(state: &CoherentState, dt: f64) -> Result<(CoherentState, u64)> {
    if !state.tapped {
        return domain("half-well evolution needs a tapped state");
    }
    if !(dt >= 0.0) {
        return domain("duration must be non-negative");
    }
    let arg = state.alpha.arg();
    let first = if arg > 0.0 { arg } else { arg + TAU } / state.omega;
    let period = TAU / state.omega;
    let reflections = if dt < first {
        0
    } else {
        1 + ((dt - first) / period).floor() as u64
    };
    let mut next = evolve_coherent(state, dt);
    if reflections % 2 == 1 {
        next.alpha = -next.alpha;
        next.phase = -next.phase;
    }
    Ok((next, reflections))
}

/// `ħω(⟨n⟩ + ½)`; for the tapped state only odd levels are populated and
/// `⟨n⟩ = |α|²·coth|α|²`.
pub fn coherent_energy(state: &CoherentState) -> f64 {
    let a2 = state.alpha.norm_sqr();
    let occupation = if state.tapped && a2 > 0.0 {
        a2 / a2.tanh()
    } else {
        a2
    };
    state.hbar * state.omega * (occupation + 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridDomain {
    FullLine,
    /// Physical region `x ≤ 0`; samples at `x > 0` show the image packet.
    HalfLineNegative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavefunctionGrid {
    pub x_values: Vec<f64>,
    pub psi_values: Vec<Complex64>,
    pub domain: GridDomain,
}

impl WavefunctionGrid {
    fn spacing(&self) -> f64 {
        self.x_values[1] - self.x_values[0]
    }

    fn in_domain(&self, x: f64) -> bool {
        match self.domain {
            GridDomain::FullLine => true,
            GridDomain::HalfLineNegative => x <= 0.0,
        }
    }

    /// Trapezoidal integral of `f(x, ψ)` over the physical part of the grid.
    fn integrate(&self, f: impl Fn(f64, Complex64) -> f64) -> f64 {
        let h = self.spacing();
        let mut total = 0.0;
        for i in 0..self.x_values.len() - 1 {
            let (x0, x1) = (self.x_values[i], self.x_values[i + 1]);
            if !self.in_domain(x0) {
                break;
            }
            if self.in_domain(x1) {
                total += 0.5 * h * (f(x0, self.psi_values[i]) + f(x1, self.psi_values[i + 1]));
            } else {
                // ψ vanishes at the wall.
                total += 0.5 * (0.0 - x0) * f(x0, self.psi_values[i]);
            }
        }
        total
    }

    pub fn norm(&self) -> f64 {
        self.integrate(|_, p| p.norm_sqr())
    }

    pub fn mean_x(&self) -> f64 {
        self.integrate(|x, p| x * p.norm_sqr()) / self.norm()
    }

    /// `⟨p⟩ = ħ·Im∫ψ*ψ'`, with `ψ'` from an eighth-order central stencil.
    pub fn mean_p(&self, hbar: f64) -> f64 {
        let derivative = self.derivative();
        let h = self.spacing();
        let n = self.x_values.len();
        let mut total = 0.0;
        for i in 0..n - 1 {
            if !self.in_domain(self.x_values[i + 1]) {
                break;
            }
            let a = (self.psi_values[i].conj() * derivative[i]).im;
            let b = (self.psi_values[i + 1].conj() * derivative[i + 1]).im;
            total += 0.5 * h * (a + b);
        }
        hbar * total / self.norm()
    }

    fn derivative(&self) -> Vec<Complex64> {
        const C8: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
        const C6: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
        const C4: [f64; 2] = [2.0 / 3.0, -1.0 / 12.0];
        const C2: [f64; 1] = [1.0 / 2.0];
        let psi = &self.psi_values;
        let n = psi.len();
        let h = self.spacing();
        (0..n)
            .map(|i| {
                let reach = i.min(n - 1 - i);
                let coeffs: &[f64] = match reach {
                    0 => {
                        return if i == 0 {
                            (psi[1] - psi[0]) / h
                        } else {
                            (psi[n - 1] - psi[n - 2]) / h
                        }
                    }
                    1 => &C2,
                    2 | 3 => &C4[..],
                    4 => &C6,
                    _ => &C8,
                };
                let mut d = Complex64::new(0.0, 0.0);
                for (j, c) in coeffs.iter().enumerate() {
                    d += (psi[i + j + 1] - psi[i - j - 1]) * *c;
                }
                d / h
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.psi_values.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }
}

/// Samples `ψ` on `points` evenly spaced positions in `[x_min, x_max]`.
pub fn sample_wavefunction(
    state: &CoherentState,
    x_min: f64,
    x_max: f64,
    points: usize,
) -> Result<WavefunctionGrid> {
    if points < 2 {
        return domain("need at least two grid points");
    }
    if !(x_max > x_min) {
        return domain("grid needs x_max > x_min");
    }
    if state.tapped && state.alpha == Complex64::new(0.0, 0.0) {
        return domain("image construction is singular at alpha = 0");
    }
    let h = (x_max - x_min) / (points - 1) as f64;
    let x_values: Vec<f64> = (0..points)
        .map(|i| {
            if i == points - 1 {
                x_max
            } else {
                x_min + h * i as f64
            }
        })
        .collect();
    Ok(WavefunctionGrid {
        psi_values: x_values.iter().map(|&x| state.psi_at(x)).collect(),
        x_values,
        domain: if state.tapped {
            GridDomain::HalfLineNegative
        } else {
            GridDomain::FullLine
        },
    })
}

/// Default grid: `⟨x⟩ ± 8Δx` with 2048 points, clipped at the wall for
/// tapped states.
pub fn default_grid(state: &CoherentState) -> Result<WavefunctionGrid> {
    default_grid_with_points(state, 2048)
}

pub fn default_grid_with_points(state: &CoherentState, points: usize) -> Result<WavefunctionGrid> {
    let dx = state.delta_x();
    let (center, _) = state.classical_track();
    if state.tapped {
        let left = center.min(0.0) - 8.0 * dx;
        sample_wavefunction(state, left, 0.0, points)
    } else {
        sample_wavefunction(state, center - 8.0 * dx, center + 8.0 * dx, points)
    }
}

/// One coherent state per small oscillator, with `⟨x⟩` the spring
/// extension and `⟨p⟩ = mẋ`. The quantum search is this ensemble following
/// the classical modal dynamics; no entangled state is formed.
pub fn coherent_ensemble(
    params: &OscillatorParams,
    state: &SystemState,
    hbar: f64,
) -> Result<Vec<CoherentState>> {
    let omega = params.omega_t();
    let probe = CoherentState::new(Complex64::new(0.0, 0.0), omega, params.m, hbar)?;
    let (dx, dp) = (probe.delta_x(), probe.delta_p());
    state
        .pos
        .iter()
        .zip(&state.vel)
        .map(|(x, v)| {
            let alpha = Complex64::new((x - state.big_pos) / (2.0 * dx), params.m * v / (2.0 * dp));
            CoherentState::new(alpha, omega, params.m, hbar)
        })
        .collect()
}
