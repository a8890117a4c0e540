//! Run manifests: everything needed to repeat an `estimate` or `hull` run.

use std::path::Path;

use rhull::{Fallback, SelectionConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::ingest::{Filters, Format};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub path: String,
    pub format: Format,
    pub sha256: String,
    /// Rows kept after parsing, filtering and de-duplication.
    pub rows: usize,
    pub diagnostics: usize,
    pub duplicates_removed: usize,
    #[serde(default)]
    pub filters: Filters,
    #[serde(default)]
    pub equirect: bool,
    /// Factor applied to x before fitting (1 without equirectangular scaling).
    pub x_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSummary {
    #[serde(default, skip_serializing_if = "Option::is_none", with = "rhull::serde_f64::option")]
    pub r_hat: Option<f64>,
    #[serde(with = "rhull::serde_f64::option")]
    pub r_used: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback: Option<Fallback>,
    pub components: usize,
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallClock {
    pub started: String,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub input: InputRecord,
    /// Selector settings (`estimate`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<SelectionConfig>,
    /// Fixed radius (`hull`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    pub seed: u64,
    /// Chord tolerance used to flatten arcs; `None` means `r / 256`.
    #[serde(default)]
    pub tolerance: Option<f64>,
    pub result: ResultSummary,
    pub outputs: Vec<OutputRecord>,
    /// Only written with `--record-time`; a timestamp makes manifests differ between runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock: Option<WallClock>,
}

impl RunManifest {
    pub fn load(path: &Path) -> CliResult<RunManifest> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Parse {
            line: e.line(),
            message: format!("manifest: {e}"),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn output(&self, role: &str) -> Option<&str> {
        self.outputs.iter().find(|o| o.role == role).map(|o| o.path.as_str())
    }
}
