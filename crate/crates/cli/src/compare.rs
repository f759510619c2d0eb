//! Metric-by-metric comparison of two run summaries.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::error::CompareError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricDiff {
    pub name: String,
    pub baseline: f64,
    pub candidate: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
    pub tolerance: f64,
}

/// Metrics outside tolerance; empty when the runs agree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffReport {
    pub compared: usize,
    pub failures: Vec<MetricDiff>,
}

impl DiffReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn read_metrics(path: &Path) -> Result<BTreeMap<String, f64>, CompareError> {
    let text = std::fs::read_to_string(path).map_err(|e| CompareError::Read {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| CompareError::Read {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let object = value
        .get("metrics")
        .and_then(|m| m.as_object())
        .ok_or_else(|| CompareError::NoMetrics {
            path: path.to_path_buf(),
        })?;
    object
        .iter()
        .map(|(name, v)| {
            v.as_f64()
                .map(|x| (name.clone(), x))
                .ok_or_else(|| CompareError::NotNumeric {
                    name: name.clone(),
                    path: path.to_path_buf(),
                })
        })
        .collect()
}

/// Compares every baseline metric against the candidate. A metric passes
/// when its absolute or its relative difference is within tolerance; the
/// tolerance is looked up by name, then falls back to `default_tol`.
pub fn compare_metrics(
    baseline: &BTreeMap<String, f64>,
    candidate: &BTreeMap<String, f64>,
    tolerances: &BTreeMap<String, f64>,
    default_tol: f64,
) -> Result<DiffReport, CompareError> {
    let mut failures = Vec::new();
    for (name, &b) in baseline {
        let c = *candidate
            .get(name)
            .ok_or_else(|| CompareError::MissingMetric(name.clone()))?;
        let tolerance = tolerances.get(name).copied().unwrap_or(default_tol);
        let abs_diff = (b - c).abs();
        let scale = b.abs().max(c.abs());
        let rel_diff = if scale > 0.0 { abs_diff / scale } else { 0.0 };
        let same = b.to_bits() == c.to_bits();
        if !same && !(abs_diff <= tolerance || rel_diff <= tolerance) {
            failures.push(MetricDiff {
                name: name.clone(),
                baseline: b,
                candidate: c,
                abs_diff,
                rel_diff,
                tolerance,
            });
        }
    }
    Ok(DiffReport {
        compared: baseline.len(),
        failures,
    })
}

pub fn compare_runs(
    baseline: &Path,
    candidate: &Path,
    tolerances: &BTreeMap<String, f64>,
    default_tol: f64,
) -> Result<DiffReport, CompareError> {
    compare_metrics(
        &read_metrics(baseline)?,
        &read_metrics(candidate)?,
        tolerances,
        default_tol,
    )
}
