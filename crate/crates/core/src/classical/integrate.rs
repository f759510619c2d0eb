//! Fixed-step RK4 integration of the full equations of motion.
//!
//! Damping adds `−2γẋ` to every coordinate, which rules out symplectic
//! schemes. The same integrator handles heterogeneous masses and springs
//! (isotope detuning, mass/spring scaling).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::exact::{initial_uniform, initial_uniform_without_translation, max_gain_predicted};
use super::{RunRecord, SystemState};
use crate::error::{domain, Error, Result};
use crate::oscillator::{check_len, Family, OscillatorParams};

/// Second-order system `q̈ = a(q, q̇)`.
pub trait ForceModel {
    fn dim(&self) -> usize;
    fn acceleration(&self, pos: &[f64], vel: &[f64], acc: &mut [f64]);
}

/// Classical RK4 on `(q, q̇)`, `steps` steps of size `h`.
pub fn rk4<F: ForceModel>(model: &F, pos: &mut [f64], vel: &mut [f64], h: f64, steps: usize) {
    rk4_observed(model, pos, vel, h, steps, |_, _, _| {});
}

/// RK4 calling `observe(step_index, pos, vel)` after every step.
pub fn rk4_observed<F, O>(
    model: &F,
    pos: &mut [f64],
    vel: &mut [f64],
    h: f64,
    steps: usize,
    mut observe: O,
) where
    F: ForceModel,
    O: FnMut(usize, &[f64], &[f64]),
{
    let d = model.dim();
    let mut k1v = vec![0.0; d];
    let mut k2v = vec![0.0; d];
    let mut k3v = vec![0.0; d];
    let mut k4v = vec![0.0; d];
    let mut k2x = vec![0.0; d];
    let mut k3x = vec![0.0; d];
    let mut k4x = vec![0.0; d];
    let mut tmp_x = vec![0.0; d];
    let mut tmp_v = vec![0.0; d];
    for step in 0..steps {
        model.acceleration(pos, vel, &mut k1v);
        for i in 0..d {
            tmp_x[i] = pos[i] + 0.5 * h * vel[i];
            tmp_v[i] = vel[i] + 0.5 * h * k1v[i];
        }
        k2x.copy_from_slice(&tmp_v);
        model.acceleration(&tmp_x, &tmp_v, &mut k2v);
        for i in 0..d {
            tmp_x[i] = pos[i] + 0.5 * h * k2x[i];
            tmp_v[i] = vel[i] + 0.5 * h * k2v[i];
        }
        k3x.copy_from_slice(&tmp_v);
        model.acceleration(&tmp_x, &tmp_v, &mut k3v);
        for i in 0..d {
            tmp_x[i] = pos[i] + h * k3x[i];
            tmp_v[i] = vel[i] + h * k3v[i];
        }
        k4x.copy_from_slice(&tmp_v);
        model.acceleration(&tmp_x, &tmp_v, &mut k4v);
        for i in 0..d {
            pos[i] += h / 6.0 * (vel[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
            vel[i] += h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
        observe(step, pos, vel);
    }
}

/// Splits `dt` into the fewest equal steps not longer than `max_step`.
fn step_plan(dt: f64, max_step: f64) -> Result<(usize, f64)> {
    if !(max_step > 0.0) {
        return domain(format!("integration step must be positive, got {max_step}"));
    }
    if !(dt >= 0.0) {
        return domain(format!("duration must be non-negative, got {dt}"));
    }
    let steps = (dt / max_step).ceil() as usize;
    Ok(if steps == 0 {
        (0, 0.0)
    } else {
        (steps, dt / steps as f64)
    })
}

/// Big oscillator plus `N` small ones with individual masses and springs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSystem {
    pub big_mass: f64,
    pub big_spring: f64,
    pub masses: Vec<f64>,
    pub springs: Vec<f64>,
    pub gamma: f64,
}

impl ForceModel for ChainSystem {
    fn dim(&self) -> usize {
        self.masses.len() + 1
    }

    // Index 0 is the big oscillator.
    fn acceleration(&self, pos: &[f64], vel: &[f64], acc: &mut [f64]) {
        let big = pos[0];
        let mut pull = -self.big_spring * big;
        for i in 0..self.masses.len() {
            let force = self.springs[i] * (pos[i + 1] - big);
            pull += force;
            acc[i + 1] = -force / self.masses[i] - 2.0 * self.gamma * vel[i + 1];
        }
        acc[0] = pull / self.big_mass - 2.0 * self.gamma * vel[0];
    }
}

impl ChainSystem {
    pub fn uniform(params: &OscillatorParams, gamma: f64) -> Result<Self> {
        params.validate()?;
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return domain(format!("damping must be >= 0, got {gamma}"));
        }
        Ok(Self {
            big_mass: params.big_mass,
            big_spring: params.big_spring,
            masses: vec![params.m; params.n],
            springs: vec![params.k; params.n],
            gamma,
        })
    }

    pub fn n(&self) -> usize {
        self.masses.len()
    }

    fn pack(&self, state: &SystemState) -> Result<(Vec<f64>, Vec<f64>)> {
        check_len(self.n(), state.pos.len())?;
        check_len(self.n(), state.vel.len())?;
        let mut pos = Vec::with_capacity(self.dim());
        let mut vel = Vec::with_capacity(self.dim());
        pos.push(state.big_pos);
        vel.push(state.big_vel);
        pos.extend_from_slice(&state.pos);
        vel.extend_from_slice(&state.vel);
        Ok((pos, vel))
    }

    fn unpack(time: f64, pos: &[f64], vel: &[f64]) -> SystemState {
        SystemState {
            time,
            big_pos: pos[0],
            big_vel: vel[0],
            pos: pos[1..].to_vec(),
            vel: vel[1..].to_vec(),
        }
    }

    pub fn energy(&self, state: &SystemState) -> f64 {
        let mut e = 0.5 * self.big_mass * state.big_vel * state.big_vel
            + 0.5 * self.big_spring * state.big_pos * state.big_pos;
        for i in 0..self.n() {
            e += self.oscillator_energy(state, i);
        }
        e
    }

    pub fn oscillator_energy(&self, state: &SystemState, i: usize) -> f64 {
        let ext = state.pos[i] - state.big_pos;
        0.5 * self.masses[i] * state.vel[i] * state.vel[i] + 0.5 * self.springs[i] * ext * ext
    }

    /// Total momentum `MẊ + Σ mᵢẋᵢ`.
    pub fn momentum(&self, state: &SystemState) -> f64 {
        self.big_mass * state.big_vel
            + self
                .masses
                .iter()
                .zip(&state.vel)
                .map(|(m, v)| m * v)
                .sum::<f64>()
    }

    pub fn evolve(&self, state: &SystemState, dt: f64, max_step: f64) -> Result<SystemState> {
        let (steps, h) = step_plan(dt, max_step)?;
        let (mut pos, mut vel) = self.pack(state)?;
        rk4(self, &mut pos, &mut vel, h, steps);
        Ok(Self::unpack(state.time + dt, &pos, &vel))
    }

    /// Clock-driven taps: at `t = 0, interval, …` the target velocity is
    /// reversed, then the system evolves one interval. Returns the state at
    /// each tap instant (including the start) and after the last interval.
    ///
    /// With `strict`, a tap whose displacement exceeds `tol` aborts the run;
    /// otherwise it is counted as a warning and applied anyway.
    #[allow(clippy::too_many_arguments)]
    pub fn run_clocked(
        &self,
        start: &SystemState,
        target: usize,
        interval: f64,
        taps: u64,
        max_step: f64,
        tol: f64,
        strict: bool,
    ) -> Result<ClockedRun> {
        if target >= self.n() {
            return domain(format!(
                "target {target} out of range for {} oscillators",
                self.n()
            ));
        }
        let (steps, h) = step_plan(interval, max_step)?;
        let (mut pos, mut vel) = self.pack(start)?;
        let mut instants = vec![start.clone()];
        let mut warnings = 0;
        let mut time = start.time;
        for _ in 0..taps {
            let displacement = (pos[target + 1] - pos[0]).abs();
            if !(displacement <= tol) {
                if strict {
                    return Err(Error::TapTiming {
                        time,
                        displacement,
                        tolerance: tol,
                    });
                }
                warnings += 1;
            }
            vel[target + 1] = -vel[target + 1];
            rk4(self, &mut pos, &mut vel, h, steps);
            time += interval;
            instants.push(Self::unpack(time, &pos, &vel));
        }
        Ok(ClockedRun { instants, warnings })
    }
}

/// States at the tap instants of a clock-driven run.
#[derive(Debug, Clone, PartialEq)]
pub struct ClockedRun {
    pub instants: Vec<SystemState>,
    pub warnings: usize,
}

/// Integrates the uniform system with damping `gamma` over `dt`.
pub fn evolve_damped(
    params: &OscillatorParams,
    state: &SystemState,
    gamma: f64,
    dt: f64,
    step: f64,
) -> Result<SystemState> {
    ChainSystem::uniform(params, gamma)?.evolve(state, dt, step)
}

/// Default integrator step, `2π/10⁴` in units of the small-oscillator period.
pub fn default_step(params: &OscillatorParams) -> f64 {
    2.0 * PI / params.omega_t() / 1.0e4
}

/// The tapping search on the damped system, integrated numerically.
/// Taps use a displacement tolerance of `1e-5·|A|`.
pub fn run_search_damped(
    params: &OscillatorParams,
    target: usize,
    amplitude: f64,
    taps: u64,
    gamma: f64,
    step: f64,
) -> Result<RunRecord> {
    let interval = params
        .tap_interval()
        .ok_or_else(|| Error::Domain("custom designs have no tap schedule".into()))?;
    let start = match params.family {
        Family::CaseTwo => initial_uniform_without_translation(params, amplitude)?,
        _ => initial_uniform(params, amplitude)?,
    };
    let chain = ChainSystem::uniform(params, gamma)?;
    let tol = 1e-5 * amplitude.abs();
    let run = chain.run_clocked(&start, target, interval, taps, step, tol, true)?;
    let initial_kinetic = 0.5 * params.m * amplitude * amplitude;
    let gains: Vec<f64> = run
        .instants
        .iter()
        .map(|s| 0.5 * params.m * s.vel[target] * s.vel[target] / initial_kinetic)
        .collect();
    let e0 = chain.energy(&start);
    let last = run.instants.last().expect("start is always recorded");
    Ok(RunRecord {
        target,
        interval,
        tap_times: run.instants[..run.instants.len() - 1]
            .iter()
            .map(|s| s.time)
            .take(taps as usize)
            .collect(),
        target_energy_series: run
            .instants
            .iter()
            .map(|s| chain.oscillator_energy(s, target))
            .collect(),
        gain_max_predicted: max_gain_predicted(params, &start, target)?,
        gain_achieved: gains.iter().copied().fold(f64::MIN, f64::max),
        gain_final: *gains.last().expect("start is always recorded"),
        energy_drift: (chain.energy(last) - e0) / e0,
        snapshots: run.instants,
    })
}

/// Outcome of running the search with per-oscillator mass and spring scale factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    /// `√(kᵢ/mᵢ)` of each small oscillator in the scaled system.
    pub natural_frequencies: Vec<f64>,
    /// `√(k/m)` of the unscaled design.
    pub reference_frequency: f64,
    /// Largest `|E_t(scaled) − E_t(unscaled)|` over the sample instants,
    /// relative to the initial total energy of the unscaled run.
    pub max_deviation: f64,
    pub samples: usize,
    /// Taps whose displacement exceeded tolerance in the scaled run.
    pub warnings: usize,
}

/// Compares the search on `mᵢ = αᵢm, kᵢ = αᵢk` against the unscaled design.
///
/// The scaled run starts from `xᵢ/√αᵢ, ẋᵢ/√αᵢ`, so every small oscillator
/// begins with the same energy as in the reference run. Taps follow the
/// family clock when there is one; custom designs are sampled without taps.
pub fn scaling_probe(
    params: &OscillatorParams,
    alphas: &[f64],
    state: &SystemState,
    target: usize,
    horizon: f64,
    step: f64,
) -> Result<ScalingReport> {
    params.validate()?;
    check_len(params.n, alphas.len())?;
    if let Some(bad) = alphas.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return domain(format!("scale factors must be positive, got {bad}"));
    }
    if !(horizon > 0.0) {
        return domain("horizon must be positive");
    }
    let reference = ChainSystem::uniform(params, 0.0)?;
    let scaled = ChainSystem {
        masses: alphas.iter().map(|a| a * params.m).collect(),
        springs: alphas.iter().map(|a| a * params.k).collect(),
        ..reference.clone()
    };
    let mut scaled_start = state.clone();
    for (i, a) in alphas.iter().enumerate() {
        let s = a.sqrt();
        scaled_start.pos[i] /= s;
        scaled_start.vel[i] /= s;
    }

    let (interval, taps, apply_taps) = match params.tap_interval() {
        Some(dt) => (dt, ((horizon / dt) + 1e-9).floor().max(1.0) as u64, true),
        None => (horizon / 64.0, 64, false),
    };
    let tol = 1e-5 * state.velocity_scale().max(f64::MIN_POSITIVE);
    let (ref_run, scaled_run) = if apply_taps {
        (
            reference.run_clocked(state, target, interval, taps, step, f64::INFINITY, false)?,
            scaled.run_clocked(&scaled_start, target, interval, taps, step, tol, false)?,
        )
    } else {
        (
            sample_free(&reference, state, interval, taps, step)?,
            sample_free(&scaled, &scaled_start, interval, taps, step)?,
        )
    };
    let e0 = reference.energy(state);
    let max_deviation = ref_run
        .instants
        .iter()
        .zip(&scaled_run.instants)
        .map(|(a, b)| {
            (reference.oscillator_energy(a, target) - scaled.oscillator_energy(b, target)).abs()
                / e0
        })
        .fold(0.0, f64::max);
    Ok(ScalingReport {
        natural_frequencies: scaled
            .springs
            .iter()
            .zip(&scaled.masses)
            .map(|(k, m)| (k / m).sqrt())
            .collect(),
        reference_frequency: params.omega_t(),
        max_deviation,
        samples: ref_run.instants.len(),
        warnings: scaled_run.warnings,
    })
}

fn sample_free(
    chain: &ChainSystem,
    start: &SystemState,
    interval: f64,
    count: u64,
    step: f64,
) -> Result<ClockedRun> {
    let mut instants = vec![start.clone()];
    for _ in 0..count {
        let next = chain.evolve(instants.last().expect("non-empty"), interval, step)?;
        instants.push(next);
    }
    Ok(ClockedRun {
        instants,
        warnings: 0,
    })
}

/// A single uncoupled damped oscillator, `ẍ + 2γẋ + ω₀²x = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampedOscillator {
    pub omega0: f64,
    pub gamma: f64,
}

impl ForceModel for DampedOscillator {
    fn dim(&self) -> usize {
        1
    }

    fn acceleration(&self, pos: &[f64], vel: &[f64], acc: &mut [f64]) {
        acc[0] = -self.omega0 * self.omega0 * pos[0] - 2.0 * self.gamma * vel[0];
    }
}

/// Frequency and envelope measured from an integrated damped oscillator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DampingMeasurement {
    /// From the spacing of upward zero crossings.
    pub frequency: f64,
    /// `√(ω₀² − γ²)`.
    pub expected_frequency: f64,
    pub peak_times: Vec<f64>,
    pub peak_values: Vec<f64>,
    /// `max |x_k/x_1 − e^{−γ(t_k − t_1)}|` over the measured peaks.
    pub envelope_max_error: f64,
    /// Decay rate fitted from the first and last peak.
    pub decay_rate: f64,
}

fn hermite(f0: f64, d0: f64, f1: f64, d1: f64, h: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * f0
        + (s3 - 2.0 * s2 + s) * h * d0
        + (-2.0 * s3 + 3.0 * s2) * f1
        + (s3 - s2) * h * d1
}

/// Root of the cubic Hermite interpolant on `[0, 1]`, given a sign change.
fn hermite_root(f0: f64, d0: f64, f1: f64, d1: f64, h: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let fm = hermite(f0, d0, f1, d1, h, mid);
        if (fm > 0.0) == (f0 > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Integrates `x(0) = 1, ẋ(0) = −γ` (so `x = e^{−γt}cos(ω_d t)`) over
/// `periods` damped periods and measures frequency and envelope.
pub fn measure_damped_oscillator(
    omega0: f64,
    gamma: f64,
    periods: usize,
    step: f64,
) -> Result<DampingMeasurement> {
    if !(omega0 > 0.0) || !(gamma >= 0.0) || gamma >= omega0 {
        return domain("need 0 <= gamma < omega0");
    }
    if periods < 2 {
        return domain("need at least two periods");
    }
    let model = DampedOscillator { omega0, gamma };
    let omega_d = (omega0 * omega0 - gamma * gamma).sqrt();
    let horizon = (periods as f64 + 0.5) * 2.0 * PI / omega_d;
    let (steps, h) = step_plan(horizon, step)?;

    let mut samples = Vec::with_capacity(steps + 1);
    let mut acc = [0.0];
    let mut record = |t: f64, x: f64, v: f64| {
        model.acceleration(&[x], &[v], &mut acc);
        samples.push((t, x, v, acc[0]));
    };
    let (mut pos, mut vel) = ([1.0], [-gamma]);
    record(0.0, pos[0], vel[0]);
    rk4_observed(&model, &mut pos, &mut vel, h, steps, |i, p, v| {
        record((i + 1) as f64 * h, p[0], v[0])
    });

    let mut up_crossings = Vec::new();
    let mut peaks = Vec::new();
    for w in samples.windows(2) {
        let (t0, x0, v0, a0) = w[0];
        let (_, x1, v1, a1) = w[1];
        if x0 < 0.0 && x1 >= 0.0 {
            up_crossings.push(t0 + h * hermite_root(x0, v0, x1, v1, h));
        }
        if v0 > 0.0 && v1 <= 0.0 {
            let s = hermite_root(v0, a0, v1, a1, h);
            peaks.push((t0 + h * s, hermite(x0, v0, x1, v1, h, s)));
        }
    }
    if up_crossings.len() < 2 || peaks.len() < 2 {
        return domain("too few oscillations to measure");
    }
    let span = up_crossings.last().unwrap() - up_crossings[0];
    let frequency = 2.0 * PI * (up_crossings.len() - 1) as f64 / span;
    let (t1, x1) = peaks[0];
    let envelope_max_error = peaks
        .iter()
        .map(|(t, x)| (x / x1 - (-gamma * (t - t1)).exp()).abs())
        .fold(0.0, f64::max);
    let (tn, xn) = *peaks.last().unwrap();
    Ok(DampingMeasurement {
        frequency,
        expected_frequency: omega_d,
        peak_times: peaks.iter().map(|p| p.0).collect(),
        peak_values: peaks.iter().map(|p| p.1).collect(),
        envelope_max_error,
        decay_rate: -(xn / x1).ln() / (tn - t1),
    })
}
