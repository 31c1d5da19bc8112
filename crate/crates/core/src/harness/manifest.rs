//! Run manifests: what was produced, from which config, verified by hash.

use std::fs;
use std::io::Read;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::binfmt::write_atomic;
use super::config::hex_digest;
use super::HarnessError;
use crate::analysis::DipReport;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    /// Path relative to the sweep output directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PointStatus {
    Completed,
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub parameter_value: f64,
    pub directory: String,
    #[serde(flatten)]
    pub status: PointStatus,
    pub files: Vec<FileDigest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub r2_mean: Vec<f64>,
    pub dip: DipReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub prng_id: String,
    pub config_fingerprint: String,
    pub parameter_name: String,
    pub created_unix: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub completed_unix: Option<u64>,
    pub points: Vec<PointRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSummary>,
}

impl RunManifest {
    pub fn new(config_fingerprint: String, parameter_name: String) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            prng_id: crate::rng::PRNG_ID.to_string(),
            config_fingerprint,
            parameter_name,
            created_unix: unix_now(),
            completed_unix: None,
            points: Vec::new(),
            sweep: None,
        }
    }

    pub fn save(&self, dir: &Path) -> Result<(), HarnessError> {
        let json = serde_json::to_vec_pretty(self).expect("manifest serializes");
        write_atomic(&dir.join(MANIFEST_FILE), &json)
    }

    pub fn load(dir: &Path) -> Result<Self, HarnessError> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Format {
            path,
            reason: e.to_string(),
        })
    }

    /// The completed record for `value` whose files all exist and hash
    /// correctly, if any: the resume criterion.
    pub fn verified_point(&self, dir: &Path, value: f64) -> Option<&PointRecord> {
        let record = self
            .points
            .iter()
            .find(|p| p.parameter_value == value && p.status == PointStatus::Completed)?;
        let ok = record
            .files
            .iter()
            .all(|f| sha256_file(&dir.join(&f.path)).is_ok_and(|h| h == f.sha256));
        ok.then_some(record)
    }
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn sha256_file(path: &Path) -> Result<String, HarnessError> {
    let mut file = fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf).map_err(|e| HarnessError::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex_digest(hasher))
}
