//! Closed-form evolution and the clock-driven tapping search.

use super::{RunRecord, SystemState};
use crate::error::{domain, Error, Result};
use crate::oscillator::{
    check_len, oscillator_energy, spectrum, total_energy, Family, OscillatorParams,
};

/// Uniform start: big oscillator at rest, every small oscillator moving with `amplitude`.
pub fn initial_uniform(params: &OscillatorParams, amplitude: f64) -> Result<SystemState> {
    params.validate()?;
    if amplitude == 0.0 || !amplitude.is_finite() {
        return domain("initial amplitude must be non-zero and finite");
    }
    Ok(SystemState {
        time: 0.0,
        big_pos: 0.0,
        big_vel: 0.0,
        pos: vec![0.0; params.n],
        vel: vec![amplitude; params.n],
    })
}

/// Uniform start with the big oscillator recoiling so that total momentum
/// vanishes: `Ẋ = −(Nm/M)·A`. For the free design this removes the
/// translation mode.
pub fn initial_uniform_without_translation(
    params: &OscillatorParams,
    amplitude: f64,
) -> Result<SystemState> {
    let mut state = initial_uniform(params, amplitude)?;
    state.big_vel = -(params.n as f64 * params.m / params.big_mass) * amplitude;
    Ok(state)
}

/// Only the big oscillator moves: `Ẋ = B`, everything else at rest.
pub fn initial_push(params: &OscillatorParams, push: f64) -> Result<SystemState> {
    params.validate()?;
    if push == 0.0 || !push.is_finite() {
        return domain("initial push must be non-zero and finite");
    }
    let mut state = SystemState::at_rest(params.n);
    state.big_vel = push;
    Ok(state)
}

/// Advances the undamped system by `dt` through its normal modes.
///
/// The coupled `(X, x̄)` block rotates at `ω±` (the zero mode drifts
/// linearly); every difference coordinate `xᵢ − x̄` rotates at `ω_t`.
pub fn evolve_exact(
    params: &OscillatorParams,
    state: &SystemState,
    dt: f64,
) -> Result<SystemState> {
    check_len(params.n, state.pos.len())?;
    check_len(params.n, state.vel.len())?;
    let eig = spectrum(params);
    let nf = params.n as f64;
    let sqrt_big = params.big_mass.sqrt();
    let sqrt_cm = (nf * params.m).sqrt();

    let xbar = state.pos.iter().sum::<f64>() / nf;
    let vbar = state.vel.iter().sum::<f64>() / nf;
    let y = [sqrt_big * state.big_pos, sqrt_cm * xbar];
    let ydot = [sqrt_big * state.big_vel, sqrt_cm * vbar];

    let mut new_y = [0.0; 2];
    let mut new_ydot = [0.0; 2];
    for (v, omega) in [
        (eig.eigenvector_plus, eig.omega_plus),
        (eig.eigenvector_minus, eig.omega_minus),
    ] {
        let mode = crate::oscillator::ModeCoordinate {
            position: v[0] * y[0] + v[1] * y[1],
            velocity: v[0] * ydot[0] + v[1] * ydot[1],
        }
        .advance(omega, dt);
        for c in 0..2 {
            new_y[c] += mode.position * v[c];
            new_ydot[c] += mode.velocity * v[c];
        }
    }
    let new_xbar = new_y[1] / sqrt_cm;
    let new_vbar = new_ydot[1] / sqrt_cm;

    let omega = eig.omega_t;
    let (s, c) = (omega * dt).sin_cos();
    let mut pos = Vec::with_capacity(params.n);
    let mut vel = Vec::with_capacity(params.n);
    for (x, v) in state.pos.iter().zip(&state.vel) {
        let dy = x - xbar;
        let dv = v - vbar;
        pos.push(new_xbar + dy * c + dv * s / omega);
        vel.push(new_vbar + dv * c - dy * omega * s);
    }
    Ok(SystemState {
        time: state.time + dt,
        big_pos: new_y[0] / sqrt_big,
        big_vel: new_ydot[0] / sqrt_big,
        pos,
        vel,
    })
}

/// Elastic tapping oracle: reverses the target velocity.
///
/// The target must sit at its equilibrium, i.e. its spring extension
/// `x_t − X` must be within `displacement_tol` of zero.
pub fn tap(state: &SystemState, target: usize, displacement_tol: f64) -> Result<SystemState> {
    if target >= state.n() {
        return domain(format!(
            "target {target} out of range for {} oscillators",
            state.n()
        ));
    }
    let displacement = state.displacement(target).abs();
    if !(displacement <= displacement_tol) {
        return Err(Error::TapTiming {
            time: state.time,
            displacement,
            tolerance: displacement_tol,
        });
    }
    let mut next = state.clone();
    next.vel[target] = -next.vel[target];
    Ok(next)
}

/// Upper bound on the target energy gain reachable from `state`:
/// `[N·x̄̇² + N/(N−1)·(ẋ_t − x̄̇)²] / ẋ_t²`.
pub fn max_gain_predicted(
    params: &OscillatorParams,
    state: &SystemState,
    target: usize,
) -> Result<f64> {
    check_len(params.n, state.vel.len())?;
    if target >= params.n {
        return domain(format!(
            "target {target} out of range for {} oscillators",
            params.n
        ));
    }
    let vt = state.vel[target];
    if vt == 0.0 {
        return domain("gain is undefined for a target at rest");
    }
    let nf = params.n as f64;
    let vbar = state.center_of_mass_velocity();
    let dev = vt - vbar;
    Ok((nf * vbar * vbar + nf / (nf - 1.0) * dev * dev) / (vt * vt))
}

/// Knobs for [`run_search_from`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Snapshots recorded per tap interval (the last one is the tap instant).
    pub samples_per_interval: usize,
    /// Absolute tolerance on the target displacement at a tap; defaults to
    /// `1e-8` times the starting velocity scale.
    pub displacement_tol: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            samples_per_interval: 1,
            displacement_tol: None,
        }
    }
}

/// Runs the search from the family's standard start: uniform velocities
/// `amplitude`, with the translation mode removed for the free design.
pub fn run_search(
    params: &OscillatorParams,
    target: usize,
    amplitude: f64,
    taps: u64,
) -> Result<RunRecord> {
    let start = match params.family {
        Family::CaseTwo => initial_uniform_without_translation(params, amplitude)?,
        _ => initial_uniform(params, amplitude)?,
    };
    run_search_from(params, &start, target, taps, &RunOptions::default())
}

/// Alternates a tap with free evolution over the family's clock interval,
/// `taps` times, starting from an arbitrary state.
pub fn run_search_from(
    params: &OscillatorParams,
    start: &SystemState,
    target: usize,
    taps: u64,
    options: &RunOptions,
) -> Result<RunRecord> {
    params.validate()?;
    let interval = params
        .tap_interval()
        .ok_or_else(|| Error::Domain("custom designs have no tap schedule".into()))?;
    if options.samples_per_interval == 0 {
        return domain("samples_per_interval must be >= 1");
    }
    let gain_max_predicted = max_gain_predicted(params, start, target)?;
    let tol = options
        .displacement_tol
        .unwrap_or(1e-8 * start.velocity_scale());
    let kinetic = |s: &SystemState| 0.5 * params.m * s.vel[target] * s.vel[target];
    let initial_kinetic = kinetic(start);
    let initial_energy = total_energy(params, start);

    let mut snapshots = vec![start.clone()];
    let mut series = vec![oscillator_energy(params, start, target)];
    let mut tap_times = Vec::new();
    let mut gain_achieved = 1.0f64;
    let mut gain_final = 1.0;
    let mut state = start.clone();
    for _ in 0..taps {
        let tapped = tap(&state, target, tol)?;
        tap_times.push(tapped.time);
        let sub = options.samples_per_interval;
        for j in 1..=sub {
            let dt = interval * j as f64 / sub as f64;
            let s = evolve_exact(params, &tapped, dt)?;
            series.push(oscillator_energy(params, &s, target));
            snapshots.push(s);
        }
        state = snapshots.last().expect("at least one sample").clone();
        gain_final = kinetic(&state) / initial_kinetic;
        gain_achieved = gain_achieved.max(gain_final);
    }
    let energy_drift = (total_energy(params, &state) - initial_energy) / initial_energy;
    Ok(RunRecord {
        target,
        interval,
        snapshots,
        tap_times,
        target_energy_series: series,
        gain_max_predicted,
        gain_achieved,
        gain_final,
        energy_drift,
    })
}
