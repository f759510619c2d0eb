//! Deterministic CSV and JSON output.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentKind;
use crate::error::HarnessError;

/// Shortest round-trip representation (never more than 17 significant digits).
pub fn fmt_f64(value: f64) -> String {
    format!("{value:?}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file_name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file_name: &str, header: &[&str]) -> Self {
        Self {
            file_name: file_name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_floats(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|v| fmt_f64(*v)).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        let path = dir.join(&self.file_name);
        let csv_err = |source| HarnessError::Csv {
            path: path.clone(),
            source,
        };
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(&path)
            .map_err(csv_err)?;
        writer.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            writer.write_record(row).map_err(csv_err)?;
        }
        writer.flush().map_err(|source| HarnessError::Io {
            path: path.clone(),
            source,
        })
    }
}

/// Headline results of one run. The wall-clock duration is kept out of the
/// serialized form so that reruns are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub config: serde_json::Value,
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub artifacts: Vec<String>,
    #[serde(skip)]
    pub duration: std::time::Duration,
}

pub const SUMMARY_FILE: &str = "summary.json";

/// Writes the tables (when `csv`) and the summary (when `json`) into `dir`,
/// recording the file names in `summary.artifacts`.
pub fn write_outputs(
    dir: &Path,
    tables: &[Table],
    summary: &mut RunSummary,
    csv: bool,
    json: bool,
) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    summary.artifacts.clear();
    if csv {
        for table in tables {
            table.write(dir)?;
            summary.artifacts.push(table.file_name.clone());
        }
    }
    if json {
        summary.artifacts.push(SUMMARY_FILE.to_string());
        let path = dir.join(SUMMARY_FILE);
        let mut text = serde_json::to_string_pretty(summary).expect("summary is plain data");
        text.push('\n');
        fs::write(&path, text).map_err(|source| HarnessError::Io { path, source })?;
    }
    Ok(())
}
