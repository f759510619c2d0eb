//! Energy focusing as a catalysis mechanism: rate enhancement under a
//! Boltzmann barrier, mass-detuning sweeps, and thermal participation of
//! soft modes.
//!
//! The reaction-probability law used by [`rate_enhancement`] is a model
//! choice, `P(E) = min(1, exp(−(E_b − E)/kT))`; outputs built on it are
//! model-dependent.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{default_step, run_search, ChainSystem, SystemState};
use crate::error::{domain, Result};
use crate::oscillator::{Family, OscillatorParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactionModel {
    pub barrier_energy: f64,
    pub thermal_energy: f64,
    pub baseline_mode_energy: f64,
}

impl ReactionModel {
    pub fn new(
        barrier_energy: f64,
        thermal_energy: f64,
        baseline_mode_energy: f64,
    ) -> Result<Self> {
        let model = Self {
            barrier_energy,
            thermal_energy,
            baseline_mode_energy,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("barrier_energy", self.barrier_energy),
            ("thermal_energy", self.thermal_energy),
            ("baseline_mode_energy", self.baseline_mode_energy),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return domain(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }

    /// `ln P(E)`; zero once the mode clears the barrier.
    fn log_probability(&self, energy: f64) -> f64 {
        (-(self.barrier_energy - energy) / self.thermal_energy).min(0.0)
    }

    pub fn probability(&self, energy: f64) -> f64 {
        self.log_probability(energy).exp()
    }
}

/// `P(gain·E₀)/P(E₀)`.
pub fn rate_enhancement(model: &ReactionModel, gain: f64) -> Result<f64> {
    model.validate()?;
    if !(gain >= 1.0) || !gain.is_finite() {
        return domain(format!("gain must be >= 1, got {gain}"));
    }
    let e0 = model.baseline_mode_energy;
    Ok((model.log_probability(gain * e0) - model.log_probability(e0)).exp())
}

/// Result of a target-mass sweep; entry `i` of every vector belongs to
/// `mass_ratios[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetuningSweep {
    pub mass_ratios: Vec<f64>,
    pub gains: Vec<f64>,
    /// Taps applied away from zero displacement, per point.
    pub warnings: Vec<usize>,
    pub taps_per_point: u64,
    pub horizon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub peak_mass_ratio: f64,
    pub peak_gain: f64,
    /// `Δgain/Δln μ` between the peak and its left neighbour.
    pub left_slope: Option<f64>,
    pub right_slope: Option<f64>,
}

impl DetuningSweep {
    pub fn summary(&self) -> Option<SweepSummary> {
        let (peak, &peak_gain) = self
            .gains
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))?;
        let slope = |i: usize, j: usize| {
            (self.gains[j] - self.gains[i]) / (self.mass_ratios[j].ln() - self.mass_ratios[i].ln())
        };
        Some(SweepSummary {
            peak_mass_ratio: self.mass_ratios[peak],
            peak_gain,
            left_slope: (peak > 0).then(|| slope(peak - 1, peak)),
            right_slope: (peak + 1 < self.gains.len()).then(|| slope(peak, peak + 1)),
        })
    }
}

/// `points` log-spaced ratios in `[lo, hi]`; `(1/4, 4, 33)` puts `μ = 1` on
/// the grid.
pub fn log_spaced(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || points < 2 {
        return domain("need 0 < lo < hi and at least two points");
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..points)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == points - 1 {
                hi
            } else if 2 * i == points - 1 && (a + b).abs() < 1e-15 {
                1.0
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect())
}

pub fn default_mass_ratios() -> Vec<f64> {
    log_spaced(0.25, 4.0, 33).expect("static grid")
}

/// Per-oscillator mass multipliers for a probe run.
fn probe_system(params: &OscillatorParams, mass_factors: &[f64]) -> ChainSystem {
    ChainSystem {
        big_mass: params.big_mass,
        big_spring: params.big_spring,
        masses: mass_factors.iter().map(|f| f * params.m).collect(),
        springs: vec![params.k; params.n],
        gamma: 0.0,
    }
}

/// Equal kinetic energy `½mA²` in every small oscillator (`vᵢ = A·√(m/mᵢ)`),
/// big oscillator recoiling to zero total momentum. Reduces to the tuned
/// start when all masses match.
fn equipartition_start(system: &ChainSystem, m: f64, amplitude: f64) -> SystemState {
    let n = system.n();
    let vel: Vec<f64> = system
        .masses
        .iter()
        .map(|mi| amplitude * (m / mi).sqrt())
        .collect();
    let carried: f64 = system.masses.iter().zip(&vel).map(|(mi, v)| mi * v).sum();
    SystemState {
        time: 0.0,
        big_pos: 0.0,
        big_vel: -carried / system.big_mass,
        pos: vec![0.0; n],
        vel,
    }
}

/// Tap-attributable focusing on the tuned clock: the best target energy
/// over the tap instants of the tapped run, divided by the best target
/// energy at the same instants without taps. Equals the plain gain when all
/// masses match, since the untapped system then returns to its start every
/// interval. Also returns the number of off-zero taps.
fn probe_gain(
    params: &OscillatorParams,
    mass_factors: &[f64],
    target: usize,
    taps: u64,
    step: f64,
) -> Result<(f64, usize)> {
    let interval = params
        .tap_interval()
        .ok_or_else(|| crate::Error::Domain("custom designs have no tap schedule".into()))?;
    if taps == 0 {
        return domain("need at least one tap");
    }
    let system = probe_system(params, mass_factors);
    let start = equipartition_start(&system, params.m, 1.0);
    let run = system.run_clocked(&start, target, interval, taps, step, 1e-5, false)?;
    let tapped = run.instants[1..]
        .iter()
        .map(|s| system.oscillator_energy(s, target))
        .fold(0.0, f64::max);
    let mut free = start;
    let mut reference = 0.0f64;
    for _ in 0..taps {
        free = system.evolve(&free, interval, step)?;
        reference = reference.max(system.oscillator_energy(&free, target));
    }
    Ok((tapped / reference, run.warnings))
}

fn check_sweep_inputs(params: &OscillatorParams, ratios: &[f64], target: usize) -> Result<()> {
    params.validate()?;
    if params.family == Family::Custom {
        return domain("detuning sweeps need a solution family");
    }
    if target >= params.n {
        return domain(format!(
            "target {target} out of range for {} oscillators",
            params.n
        ));
    }
    if let Some(bad) = ratios.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return domain(format!("mass ratios must be positive, got {bad}"));
    }
    Ok(())
}

/// Replaces the target's mass by `μ·m` for each `μ` (spring unchanged) and
/// runs `taps` clock-driven taps on the tuned schedule, starting from equal
/// kinetic energy in every small oscillator and zero total momentum.
/// A single tap favours heavier targets; the peak sits at `μ = 1` from two
/// taps on. Points run in
/// parallel; the output order follows `mass_ratios`.
pub fn detuning_sweep(
    params: &OscillatorParams,
    mass_ratios: &[f64],
    taps: u64,
    target: usize,
) -> Result<DetuningSweep> {
    detuning_sweep_with_step(params, mass_ratios, taps, target, default_step(params))
}

pub fn detuning_sweep_with_step(
    params: &OscillatorParams,
    mass_ratios: &[f64],
    taps: u64,
    target: usize,
    step: f64,
) -> Result<DetuningSweep> {
    check_sweep_inputs(params, mass_ratios, target)?;
    let results: Vec<(f64, usize)> = mass_ratios
        .par_iter()
        .map(|&mu| {
            let mut factors = vec![1.0; params.n];
            factors[target] = mu;
            probe_gain(params, &factors, target, taps, step)
        })
        .collect::<Result<_>>()?;
    let interval = params.tap_interval().unwrap_or(0.0);
    Ok(DetuningSweep {
        mass_ratios: mass_ratios.to_vec(),
        gains: results.iter().map(|r| r.0).collect(),
        warnings: results.iter().map(|r| r.1).collect(),
        taps_per_point: taps,
        horizon: interval * taps as f64,
    })
}

/// Gain after a single tap of the free design (`p = 1`), exact evolution.
pub fn single_tap_gain_curve(n_values: &[usize]) -> Result<Vec<f64>> {
    n_values
        .iter()
        .map(|&n| {
            if n < 2 {
                return domain(format!("need N >= 2, got {n}"));
            }
            let params = crate::oscillator::solve_family(Family::CaseTwo, 1, n, 1.0, 1.0)?;
            Ok(run_search(&params, 0, 1.0, 1)?.gain_final)
        })
        .collect()
}

/// `(3 − 4/N)²`.
pub fn single_tap_gain_formula(n: usize) -> f64 {
    let g = 3.0 - 4.0 / n as f64;
    g * g
}

/// Gains after `taps` taps with every neighbour's mass scaled by
/// `neighbour_ratio`, against the matched system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CooperativityReport {
    pub neighbour_ratio: f64,
    pub matched_gain: f64,
    pub detuned_gain: f64,
    pub detuned_warnings: usize,
}

pub fn cooperativity_probe(
    params: &OscillatorParams,
    neighbour_ratio: f64,
    taps: u64,
    target: usize,
) -> Result<CooperativityReport> {
    check_sweep_inputs(params, &[neighbour_ratio], target)?;
    let step = default_step(params);
    let (matched_gain, _) = probe_gain(params, &vec![1.0; params.n], target, taps, step)?;
    let mut factors = vec![neighbour_ratio; params.n];
    factors[target] = 1.0;
    let (detuned_gain, detuned_warnings) = probe_gain(params, &factors, target, taps, step)?;
    Ok(CooperativityReport {
        neighbour_ratio,
        matched_gain,
        detuned_gain,
        detuned_warnings,
    })
}

pub const DEFAULT_SOFT_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoftModeReport {
    /// `ħω/kT`.
    pub ratio: f64,
    /// Bose occupancy `1/(e^{ħω/kT} − 1)`.
    pub occupancy: f64,
    pub threshold: f64,
    pub participating: bool,
}

pub fn soft_mode_check(omega: f64, hbar: f64, kt: f64) -> Result<SoftModeReport> {
    soft_mode_check_with_threshold(omega, hbar, kt, DEFAULT_SOFT_THRESHOLD)
}

pub fn soft_mode_check_with_threshold(
    omega: f64,
    hbar: f64,
    kt: f64,
    threshold: f64,
) -> Result<SoftModeReport> {
    for (name, v) in [
        ("omega", omega),
        ("hbar", hbar),
        ("kT", kt),
        ("threshold", threshold),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return domain(format!("{name} must be positive, got {v}"));
        }
    }
    let ratio = hbar * omega / kt;
    Ok(SoftModeReport {
        ratio,
        occupancy: 1.0 / ratio.exp_m1(),
        threshold,
        participating: ratio <= threshold,
    })
}
