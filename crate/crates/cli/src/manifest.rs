//! Run manifest: a JSON record of inputs, configuration and outputs, written
//! before computation starts and rewritten when the run ends.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use trickle_core::metrics::FairnessReport;
use trickle_core::model::SolverConfig;
use trickle_core::redundancy::Policy;
use trickle_core::simulator::TrickleParams;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Running,
    Complete,
    /// The run aborted; outputs listed may be missing or partial.
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyRef {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledReport {
    pub label: String,
    pub report: FairnessReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub status: Status,
    pub topology: Option<TopologyRef>,
    pub policies: Vec<Policy>,
    pub solver: Option<SolverConfig>,
    pub simulator: Option<TrickleParams>,
    pub outputs: Vec<String>,
    pub reports: Vec<LabeledReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            status: Status::Running,
            topology: None,
            policies: Vec::new(),
            solver: None,
            simulator: None,
            outputs: Vec::new(),
            reports: Vec::new(),
            error: None,
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Owns the manifest file for the duration of a run.
pub struct ManifestWriter {
    path: PathBuf,
    pub manifest: RunManifest,
}

impl ManifestWriter {
    pub fn start(path: impl Into<PathBuf>, manifest: RunManifest) -> Result<Self, CliError> {
        let w = Self {
            path: path.into(),
            manifest,
        };
        w.write()?;
        Ok(w)
    }

    pub fn write(&self) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(&self.manifest)?;
        text.push('\n');
        std::fs::write(&self.path, text).map_err(|e| CliError::file(&self.path, e))
    }

    pub fn record_output(&mut self, path: &Path) {
        self.manifest.outputs.push(path.display().to_string());
    }

    /// Marks the run complete or invalid depending on `outcome` and rewrites
    /// the file. The original error, if any, takes precedence over a failure
    /// to write the manifest.
    pub fn finish<T>(mut self, outcome: Result<T, CliError>) -> Result<T, CliError> {
        match &outcome {
            Ok(_) => self.manifest.status = Status::Complete,
            Err(e) => {
                self.manifest.status = Status::Invalid;
                self.manifest.error = Some(e.to_string());
            }
        }
        let written = self.write();
        let value = outcome?;
        written?;
        Ok(value)
    }
}

/// `out.json` → `out.manifest.json`, `out.csv` alongside.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}
