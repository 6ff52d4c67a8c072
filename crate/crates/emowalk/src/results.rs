//! The YAML results file written by `evaluate` and read by `report`.

use std::path::Path;

use emowalk_core::eval::{Protocol, SkipRecord, UserEvaluation};
use emowalk_core::features::WindowingConfig;
use emowalk_core::tuning::SearchOutcome;
use serde::{Deserialize, Serialize};

use crate::config::TaskChoice;
use crate::error::{Error, Result};

pub const RESULTS_FORMAT: &str = "emowalk-results v1";
pub const SEARCH_FORMAT: &str = "emowalk-search v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultsFile {
    pub format: String,
    pub seed: u64,
    pub config_digest: String,
    pub catalog_version: String,
    pub task: TaskChoice,
    pub windowing: WindowingConfig,
    pub protocol: Protocol,
    pub evaluations: Vec<UserEvaluation>,
    pub skipped: Vec<SkipRecord>,
}

/// Audit of a single `tune` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchFile {
    pub format: String,
    pub seed: u64,
    pub config_digest: String,
    pub source: String,
    pub task: emowalk_core::eval::Task,
    pub k: usize,
    pub n_iter: usize,
    pub n_windows: usize,
    pub search: SearchOutcome,
}

pub fn to_yaml<T: Serialize>(value: &T) -> Vec<u8> {
    serde_yaml::to_string(value).expect("results serialize").into_bytes()
}

pub fn read_results(path: &Path) -> Result<ResultsFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parsed: ResultsFile = serde_yaml::from_str(&text).map_err(|e| {
        let line = e.location().map(|l| l.line());
        Error::data(path, line, e)
    })?;
    if parsed.format != RESULTS_FORMAT {
        return Err(Error::data(
            path,
            None,
            format!("unsupported format {:?}, expected {RESULTS_FORMAT:?}", parsed.format),
        ));
    }
    Ok(parsed)
}
