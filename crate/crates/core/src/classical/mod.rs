//! Classical dynamics of the coupled system.
//!
//! [`exact`] advances the system in closed form through its normal modes and
//! runs the clock-driven tapping search. [`integrate`] is the fixed-step RK4
//! route used for damping, heterogeneous masses and detuned systems.
//! [`wall`] holds event-driven simulations with a physical reflecting wall.

pub mod exact;
pub mod integrate;
pub mod wall;

use serde::{Deserialize, Serialize};

pub use exact::{
    evolve_exact, initial_push, initial_uniform, initial_uniform_without_translation,
    max_gain_predicted, run_search, run_search_from, tap, RunOptions,
};
pub use integrate::{
    default_step, evolve_damped, measure_damped_oscillator, run_search_damped, scaling_probe,
    ChainSystem, DampingMeasurement, ScalingReport,
};
pub use wall::{find_uniform_stage, half_well_trajectory, run_wall_mode, WallRun};

/// Positions and velocities of the big oscillator and the `N` small ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub time: f64,
    pub big_pos: f64,
    pub big_vel: f64,
    pub pos: Vec<f64>,
    pub vel: Vec<f64>,
}

impl SystemState {
    /// All coordinates at rest.
    pub fn at_rest(n: usize) -> Self {
        Self {
            time: 0.0,
            big_pos: 0.0,
            big_vel: 0.0,
            pos: vec![0.0; n],
            vel: vec![0.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.pos.len()
    }

    /// Spring extension of oscillator `i`, i.e. its displacement from equilibrium.
    pub fn displacement(&self, i: usize) -> f64 {
        self.pos[i] - self.big_pos
    }

    pub fn center_of_mass_velocity(&self) -> f64 {
        self.vel.iter().sum::<f64>() / self.vel.len() as f64
    }

    /// Largest absolute velocity, used to scale tolerances.
    pub fn velocity_scale(&self) -> f64 {
        self.vel
            .iter()
            .fold(self.big_vel.abs(), |acc, v| acc.max(v.abs()))
    }
}

/// Result of a clock-driven tapping run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub target: usize,
    /// Clock interval between taps.
    pub interval: f64,
    pub snapshots: Vec<SystemState>,
    pub tap_times: Vec<f64>,
    /// Energy of the target oscillator at each snapshot.
    pub target_energy_series: Vec<f64>,
    /// Bound on the achievable gain from the starting velocities.
    pub gain_max_predicted: f64,
    /// Best target kinetic energy at a tap instant over the initial one.
    pub gain_achieved: f64,
    /// Gain at the final tap instant.
    pub gain_final: f64,
    /// `(E_end − E_start) / E_start`.
    pub energy_drift: f64,
}
