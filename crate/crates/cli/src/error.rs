use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {reason}")]
    Read { path: PathBuf, reason: String },
    #[error("config does not parse: {0}")]
    Parse(String),
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

#[derive(Debug, Error)]
pub enum CompareError {
    #[error("cannot read summary {path}: {reason}")]
    Read { path: PathBuf, reason: String },
    #[error("summary {path} has no `metrics` object")]
    NoMetrics { path: PathBuf },
    #[error("metric `{0}` is missing from the candidate")]
    MissingMetric(String),
    #[error("metric `{name}` is not a number in {path}")]
    NotNumeric { name: String, path: PathBuf },
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Engine {
        context: String,
        #[source]
        source: wavesearch::Error,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv output {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("thread pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Compare(#[from] CompareError),
}

impl HarnessError {
    /// 2 for configuration or input problems, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Compare(CompareError::Read { .. } | CompareError::NoMetrics { .. }) => 2,
            _ => 1,
        }
    }
}

pub(crate) trait EngineContext<T> {
    fn context(self, what: &str) -> Result<T, HarnessError>;
}

impl<T> EngineContext<T> for wavesearch::Result<T> {
    fn context(self, what: &str) -> Result<T, HarnessError> {
        self.map_err(|source| HarnessError::Engine {
            context: what.to_string(),
            source,
        })
    }
}
