//! Configuration-driven experiment runner for the `wavesearch` engines.
//!
//! A run validates its whole configuration, computes every table in memory,
//! and only then writes artifacts. Config errors therefore leave no files
//! behind, and identical configs produce byte-identical output.

// `!(x > 0.0)` style checks reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifacts;
pub mod compare;
pub mod config;
pub mod error;
mod experiments;

use std::path::PathBuf;
use std::time::Instant;

pub use artifacts::{RunSummary, SUMMARY_FILE};
pub use compare::{compare_runs, DiffReport, MetricDiff};
pub use config::{ExperimentConfig, ExperimentKind, OutputFormat};
pub use error::{CompareError, ConfigError, HarnessError};

pub const DEFAULT_OUTPUT_DIR: &str = "wavesearch-out";

pub fn output_dir(config: &ExperimentConfig) -> PathBuf {
    config
        .output
        .dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

fn compute(config: &ExperimentConfig) -> Result<experiments::Outcome, HarnessError> {
    match config.kind()? {
        ExperimentKind::Grover => experiments::grover(config),
        ExperimentKind::Classical => experiments::classical(config),
        ExperimentKind::Quantum => experiments::quantum(config),
        ExperimentKind::Sweep => experiments::sweep(config),
        ExperimentKind::Catalysis => experiments::catalysis(config),
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunSummary, HarnessError> {
    config.validate()?;
    let kind = config.kind()?;
    let started = Instant::now();
    let outcome = match config.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| HarnessError::Pool(e.to_string()))?
            .install(|| compute(config))?,
        None => compute(config)?,
    };
    let mut summary = RunSummary {
        kind,
        seed: config.seed,
        config: serde_json::to_value(config).expect("config is plain data"),
        metrics: outcome.metrics,
        notes: outcome.notes,
        artifacts: Vec::new(),
        duration: started.elapsed(),
    };
    let format = config.output.format.unwrap_or_default();
    artifacts::write_outputs(
        &output_dir(config),
        &outcome.tables,
        &mut summary,
        format.csv(),
        format.json(),
    )?;
    Ok(summary)
}
