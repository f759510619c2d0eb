//! Experiment configuration: one TOML file, one section per engine.
//!
//! Every section is optional and falls back to its defaults; unknown keys
//! are rejected. [`ExperimentConfig::validate`] checks every field the chosen
//! experiment will read before anything runs.

use std::f64::consts::TAU;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use wavesearch::oscillator::{solve_family, Family, OscillatorParams};

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Grover,
    Classical,
    Quantum,
    Sweep,
    Catalysis,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::Grover => "grover",
            ExperimentKind::Classical => "classical",
            ExperimentKind::Quantum => "quantum",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::Catalysis => "catalysis",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        self != OutputFormat::Json
    }

    pub fn json(self) -> bool {
        self != OutputFormat::Csv
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    #[default]
    Exact,
    Damped,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroverConfig {
    pub n: usize,
    pub target: usize,
    /// Monte-Carlo samples for the random-stop average; 0 skips it.
    pub samples: usize,
}

impl Default for GroverConfig {
    fn default() -> Self {
        Self {
            n: 4,
            target: 0,
            samples: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassicalConfig {
    pub family: Family,
    pub p: u32,
    pub n: usize,
    pub m: f64,
    pub k: f64,
    pub amplitude: f64,
    pub target: usize,
    /// Defaults to the optimal query count for `n`.
    pub taps: Option<u64>,
    pub integrator: Integrator,
    pub gamma: f64,
    /// Integrator step; defaults to a ten-thousandth of the small period.
    pub step: Option<f64>,
    pub samples_per_interval: usize,
    pub include_positions: bool,
}

impl Default for ClassicalConfig {
    fn default() -> Self {
        Self {
            family: Family::CaseTwo,
            p: 1,
            n: 4,
            m: 1.0,
            k: 1.0,
            amplitude: 1.0,
            target: 0,
            taps: None,
            integrator: Integrator::Exact,
            gamma: 0.0,
            step: None,
            samples_per_interval: 16,
            include_positions: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuantumConfig {
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub omega: f64,
    pub mass: f64,
    pub hbar: f64,
    pub tapped: bool,
    pub duration: f64,
    /// Wavefunction snapshots, evenly spaced over `duration`.
    pub frames: usize,
    pub points: usize,
    /// Rows of the expectation-value track.
    pub track_samples: usize,
}

impl Default for QuantumConfig {
    fn default() -> Self {
        Self {
            alpha_re: 2.0,
            alpha_im: 0.0,
            omega: 1.0,
            mass: 1.0,
            hbar: 1.0,
            tapped: false,
            duration: TAU,
            frames: 9,
            points: 2048,
            track_samples: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub family: Family,
    pub p: u32,
    pub n: usize,
    pub target: usize,
    /// Defaults to the optimal query count for `n`, at least 2.
    pub taps: Option<u64>,
    /// Explicit ratios; otherwise a log-spaced grid.
    pub mass_ratios: Option<Vec<f64>>,
    pub mu_min: f64,
    pub mu_max: f64,
    pub points: usize,
    pub step: Option<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            family: Family::CaseTwo,
            p: 1,
            n: 16,
            target: 0,
            taps: None,
            mass_ratios: None,
            mu_min: 0.25,
            mu_max: 4.0,
            points: 33,
            step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CatalysisConfig {
    pub barrier_energy: f64,
    pub thermal_energy: f64,
    pub baseline_mode_energy: f64,
    /// Sizes for the single-tap gain curve.
    pub n_values: Vec<usize>,
    /// Extra gains to evaluate the enhancement at.
    pub gains: Vec<f64>,
    pub soft_mode_omega: f64,
    pub hbar: f64,
    pub soft_threshold: f64,
}

impl Default for CatalysisConfig {
    fn default() -> Self {
        Self {
            barrier_energy: 10.0,
            thermal_energy: 1.0,
            baseline_mode_energy: 1.0,
            n_values: vec![2, 4, 8, 16, 32, 64, 128, 256],
            gains: vec![1.0, 2.0, 4.0, 9.0],
            soft_mode_omega: 1.0,
            hbar: 1.0,
            soft_threshold: wavesearch::catalysis::DEFAULT_SOFT_THRESHOLD,
        }
    }
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub kind: Option<ExperimentKind>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Parallel sweep points; defaults to the number of cores.
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub grover: GroverConfig,
    #[serde(default)]
    pub classical: ClassicalConfig,
    #[serde(default)]
    pub quantum: QuantumConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub catalysis: CatalysisConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config uses defaults")
    }
}

impl FromStr for ExperimentConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }
}

fn invalid<T>(field: &str, reason: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid {
        field: field.to_string(),
        reason: reason.into(),
    })
}

fn positive(field: &str, value: f64) -> Result<(), ConfigError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        invalid(field, format!("must be positive and finite, got {value}"))
    }
}

fn family_params(
    section: &str,
    family: Family,
    p: u32,
    n: usize,
    m: f64,
    k: f64,
) -> Result<OscillatorParams, ConfigError> {
    if family == Family::Custom {
        return invalid(
            &format!("{section}.family"),
            "custom designs have no tap schedule",
        );
    }
    if p == 0 {
        return invalid(&format!("{section}.p"), "must be >= 1");
    }
    if n < 2 {
        return invalid(&format!("{section}.n"), format!("must be >= 2, got {n}"));
    }
    positive(&format!("{section}.m"), m)?;
    positive(&format!("{section}.k"), k)?;
    solve_family(family, p, n, m, k).map_err(|e| ConfigError::Invalid {
        field: format!("{section}.family"),
        reason: e.to_string(),
    })
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        text.parse()
    }

    pub fn kind(&self) -> Result<ExperimentKind, ConfigError> {
        self.kind.ok_or_else(|| ConfigError::Invalid {
            field: "kind".into(),
            reason: "no experiment kind given".into(),
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.jobs == Some(0) {
            return invalid("jobs", "must be >= 1");
        }
        match self.kind()? {
            ExperimentKind::Grover => self.validate_grover(),
            ExperimentKind::Classical => self.classical_params().map(|_| ()),
            ExperimentKind::Quantum => self.validate_quantum(),
            ExperimentKind::Sweep => self.sweep_params().map(|_| ()),
            ExperimentKind::Catalysis => self.validate_catalysis(),
        }
    }

    fn validate_grover(&self) -> Result<(), ConfigError> {
        let g = &self.grover;
        if g.n == 0 {
            return invalid("grover.n", "must be >= 1");
        }
        if g.target >= g.n {
            return invalid("grover.target", format!("must be < n = {}", g.n));
        }
        if g.n > 1 << 22 {
            return invalid(
                "grover.n",
                "state vectors above 2^22 entries are not supported",
            );
        }
        Ok(())
    }

    pub fn classical_params(&self) -> Result<OscillatorParams, ConfigError> {
        let c = &self.classical;
        let params = family_params("classical", c.family, c.p, c.n, c.m, c.k)?;
        if c.target >= c.n {
            return invalid("classical.target", format!("must be < n = {}", c.n));
        }
        if !(c.amplitude != 0.0 && c.amplitude.is_finite()) {
            return invalid("classical.amplitude", "must be non-zero and finite");
        }
        if !(c.gamma >= 0.0 && c.gamma.is_finite()) {
            return invalid("classical.gamma", format!("must be >= 0, got {}", c.gamma));
        }
        if c.gamma > 0.0 && c.integrator == Integrator::Exact {
            return invalid("classical.gamma", "damping needs integrator = \"damped\"");
        }
        if let Some(step) = c.step {
            positive("classical.step", step)?;
        }
        if c.samples_per_interval == 0 {
            return invalid("classical.samples_per_interval", "must be >= 1");
        }
        Ok(params)
    }

    fn validate_quantum(&self) -> Result<(), ConfigError> {
        let q = &self.quantum;
        for (field, v) in [
            ("quantum.alpha_re", q.alpha_re),
            ("quantum.alpha_im", q.alpha_im),
        ] {
            if !v.is_finite() {
                return invalid(field, "must be finite");
            }
        }
        positive("quantum.omega", q.omega)?;
        positive("quantum.mass", q.mass)?;
        positive("quantum.hbar", q.hbar)?;
        if !(q.duration >= 0.0 && q.duration.is_finite()) {
            return invalid("quantum.duration", "must be >= 0");
        }
        if q.tapped && q.alpha_re == 0.0 && q.alpha_im == 0.0 {
            return invalid("quantum.alpha_re", "a tapped state needs alpha != 0");
        }
        if q.frames == 0 {
            return invalid("quantum.frames", "must be >= 1");
        }
        if q.points < 2 {
            return invalid("quantum.points", "must be >= 2");
        }
        if q.track_samples < 2 {
            return invalid("quantum.track_samples", "must be >= 2");
        }
        Ok(())
    }

    pub fn sweep_params(&self) -> Result<(OscillatorParams, Vec<f64>, u64), ConfigError> {
        let s = &self.sweep;
        let params = family_params("sweep", s.family, s.p, s.n, 1.0, 1.0)?;
        if s.target >= s.n {
            return invalid("sweep.target", format!("must be < n = {}", s.n));
        }
        if let Some(step) = s.step {
            positive("sweep.step", step)?;
        }
        let ratios = match &s.mass_ratios {
            Some(r) if r.is_empty() => return invalid("sweep.mass_ratios", "must not be empty"),
            Some(r) => {
                if let Some(bad) = r.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                    return invalid("sweep.mass_ratios", format!("must be positive, got {bad}"));
                }
                r.clone()
            }
            None => {
                positive("sweep.mu_min", s.mu_min)?;
                if !(s.mu_max > s.mu_min && s.mu_max.is_finite()) {
                    return invalid("sweep.mu_max", "must exceed mu_min");
                }
                if s.points < 2 {
                    return invalid("sweep.points", "must be >= 2");
                }
                wavesearch::catalysis::log_spaced(s.mu_min, s.mu_max, s.points).map_err(|e| {
                    ConfigError::Invalid {
                        field: "sweep.points".into(),
                        reason: e.to_string(),
                    }
                })?
            }
        };
        let taps = match s.taps {
            Some(0) => return invalid("sweep.taps", "must be >= 1"),
            Some(t) => t,
            None => wavesearch::grover::optimal_queries(s.n)
                .map(|plan| plan.q_int.max(2))
                .map_err(|e| ConfigError::Invalid {
                    field: "sweep.n".into(),
                    reason: e.to_string(),
                })?,
        };
        Ok((params, ratios, taps))
    }

    fn validate_catalysis(&self) -> Result<(), ConfigError> {
        let c = &self.catalysis;
        positive("catalysis.barrier_energy", c.barrier_energy)?;
        positive("catalysis.thermal_energy", c.thermal_energy)?;
        positive("catalysis.baseline_mode_energy", c.baseline_mode_energy)?;
        positive("catalysis.soft_mode_omega", c.soft_mode_omega)?;
        positive("catalysis.hbar", c.hbar)?;
        positive("catalysis.soft_threshold", c.soft_threshold)?;
        if let Some(bad) = c.n_values.iter().find(|n| **n < 2) {
            return invalid(
                "catalysis.n_values",
                format!("every N must be >= 2, got {bad}"),
            );
        }
        if let Some(bad) = c.gains.iter().find(|g| !(**g >= 1.0 && g.is_finite())) {
            return invalid("catalysis.gains", format!("gains must be >= 1, got {bad}"));
        }
        Ok(())
    }
}
