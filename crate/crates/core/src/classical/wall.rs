//! Free-running simulations with a physical wall, and the push-start helper.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use super::exact::evolve_exact;
use super::SystemState;
use crate::error::{domain, Result};
use crate::oscillator::{check_len, OscillatorParams};

/// Trajectory of a wall-mode run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallRun {
    /// State at the end of every detection step.
    pub samples: Vec<SystemState>,
    pub contact_times: Vec<f64>,
}

impl WallRun {
    pub fn final_state(&self) -> &SystemState {
        self.samples.last().expect("start is always recorded")
    }
}

/// Evolves the coupled system with an impenetrable wall at `x_t = 0`; the
/// target lives on `x_t ≤ 0` and reflects elastically on contact.
///
/// Contacts are located by bisection on the exact evolution within each
/// `detect_step`; the step must be short against the fastest mode period
/// so that no double crossing is skipped.
pub fn run_wall_mode(
    params: &OscillatorParams,
    state: &SystemState,
    target: usize,
    horizon: f64,
    detect_step: f64,
) -> Result<WallRun> {
    params.validate()?;
    check_len(params.n, state.pos.len())?;
    if target >= params.n {
        return domain(format!(
            "target {target} out of range for {} oscillators",
            params.n
        ));
    }
    if state.pos[target] > 0.0 {
        return domain("target must start on the x <= 0 side of the wall");
    }
    if !(detect_step > 0.0) || !(horizon >= 0.0) {
        return domain("need a positive detection step and non-negative horizon");
    }
    let end = state.time + horizon;
    let mut current = state.clone();
    let mut samples = vec![current.clone()];
    let mut contact_times = Vec::new();
    while current.time < end {
        if current.pos[target] >= 0.0 && current.vel[target] > 0.0 {
            current.vel[target] = -current.vel[target];
            contact_times.push(current.time);
        }
        let dt = detect_step.min(end - current.time);
        let next = evolve_exact(params, &current, dt)?;
        if next.pos[target] > 0.0 {
            let (mut lo, mut hi) = (0.0, dt);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if evolve_exact(params, &current, mid)?.pos[target] > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let mut hit = evolve_exact(params, &current, lo)?;
            hit.pos[target] = hit.pos[target].min(0.0);
            hit.vel[target] = -hit.vel[target].abs();
            contact_times.push(hit.time);
            current = hit;
        } else {
            current = next;
            samples.push(current.clone());
        }
    }
    Ok(WallRun {
        samples,
        contact_times,
    })
}

/// Event-driven motion of one oscillator in the half-harmonic well
/// (`V = ½mω²x²` for `x ≤ 0`, wall at `0`). Returns `(x, ẋ)` at each of the
/// ascending `times`.
pub fn half_well_trajectory(
    x0: f64,
    v0: f64,
    omega: f64,
    times: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if x0 > 0.0 {
        return domain("half-well motion starts at x <= 0");
    }
    if !(omega > 0.0) {
        return domain("frequency must be positive");
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|t| *t < 0.0) {
        return domain("sample times must be ascending and non-negative");
    }
    let free = |x: f64, v: f64, dt: f64| {
        let (s, c) = (omega * dt).sin_cos();
        (x * c + v * s / omega, v * c - x * omega * s)
    };
    let (mut t, mut x, mut v) = (0.0, x0, v0);
    let mut out = Vec::with_capacity(times.len());
    for &target_time in times {
        loop {
            if x >= 0.0 && v > 0.0 {
                v = -v;
            }
            // Next upward zero crossing of the free motion R·cos(ωτ − φ).
            let phase = (v / omega).atan2(x);
            let mut wait = (phase - FRAC_PI_2).rem_euclid(TAU) / omega;
            if wait == 0.0 {
                wait = TAU / omega;
            }
            if t + wait <= target_time {
                let speed = x.hypot(v / omega) * omega;
                t += wait;
                x = 0.0;
                v = -speed;
            } else {
                let (xn, vn) = free(x, v, target_time - t);
                t = target_time;
                x = xn.min(0.0);
                v = vn;
                break;
            }
        }
        out.push((x, v));
    }
    Ok(out)
}

/// Scans `[0, horizon]` for the instant where the small oscillators carry
/// the most kinetic energy while `|Ẋ| ≤ tol·v_ref`, with `v_ref` the speed
/// of the whole energy concentrated in the big oscillator.
pub fn find_uniform_stage(
    params: &OscillatorParams,
    state: &SystemState,
    horizon: f64,
    samples: usize,
    tol: f64,
) -> Result<Option<SystemState>> {
    if samples == 0 || !(horizon > 0.0) {
        return domain("need a positive horizon and at least one sample");
    }
    let energy = crate::oscillator::total_energy(params, state);
    let v_ref = (2.0 * energy / params.big_mass).sqrt();
    let mut best: Option<(f64, SystemState)> = None;
    for j in 1..=samples {
        let s = evolve_exact(params, state, horizon * j as f64 / samples as f64)?;
        if s.big_vel.abs() > tol * v_ref {
            continue;
        }
        let score: f64 = s.vel.iter().map(|v| v * v).sum();
        if best.as_ref().is_none_or(|(b, _)| score > *b) {
            best = Some((score, s));
        }
    }
    Ok(best.map(|(_, s)| s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::exact::initial_push;
    use crate::oscillator::{solve_family, total_energy, Family};
    use std::f64::consts::PI;

    #[test]
    fn half_well_is_folded_free_motion() {
        let omega = 1.3;
        let times: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        let (x0, v0) = (-0.7, 0.4);
        let traj = half_well_trajectory(x0, v0, omega, &times).unwrap();
        for (t, (x, _)) in times.iter().zip(traj) {
            let free = x0 * (omega * t).cos() + v0 / omega * (omega * t).sin();
            assert!((x + free.abs()).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn half_well_rejects_wrong_side() {
        assert!(half_well_trajectory(0.1, 0.0, 1.0, &[0.0]).is_err());
    }

    #[test]
    fn wall_mode_conserves_energy() {
        let params = solve_family(Family::CaseTwo, 1, 4, 1.0, 1.0).unwrap();
        let mut s = SystemState::at_rest(4);
        s.vel = vec![1.0, 0.5, -0.3, 0.2];
        s.pos[0] = -0.1;
        let e0 = total_energy(&params, &s);
        let run = run_wall_mode(&params, &s, 0, 20.0, 0.01).unwrap();
        assert!(!run.contact_times.is_empty());
        let e1 = total_energy(&params, run.final_state());
        assert!((e1 - e0).abs() / e0 < 1e-9);
        assert!(run.samples.iter().all(|s| s.pos[0] <= 1e-12));
    }

    #[test]
    fn push_reaches_a_moving_stage() {
        let params = solve_family(Family::CaseOne, 1, 16, 1.0, 1.0).unwrap();
        let start = initial_push(&params, 1.0).unwrap();
        let stage = find_uniform_stage(&params, &start, 4.0 * PI, 4000, 0.05)
            .unwrap()
            .expect("a low-Ẋ instant exists");
        assert!(
            stage.big_vel.abs()
                <= 0.05 * (2.0 * total_energy(&params, &start) / params.big_mass).sqrt()
        );
        let v = stage.vel[0];
        assert!(v.abs() > 0.0);
        assert!(stage.vel.iter().all(|w| (w - v).abs() < 1e-12));
    }
}
