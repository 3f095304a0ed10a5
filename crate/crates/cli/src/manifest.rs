//! Run manifests: enough provenance to reproduce any stage bit-for-bit.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use pmprune_core::digest::file_digest_string;

use crate::error::CliResult;

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub digest: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub stage: String,
    pub master_seed: u64,
    /// Resolved configuration snapshot (flags merged over config file).
    pub config: BTreeMap<String, String>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

pub struct RunManifestBuilder {
    stage: String,
    master_seed: u64,
    config: BTreeMap<String, String>,
    started_unix_ms: u64,
}

impl RunManifestBuilder {
    pub fn new(stage: &str, master_seed: u64, config: BTreeMap<String, String>) -> Self {
        RunManifestBuilder {
            stage: stage.to_string(),
            master_seed,
            config,
            started_unix_ms: now_ms(),
        }
    }

    /// Digest the listed files and write the manifest next to the stage
    /// output.
    pub fn write(
        self,
        manifest_path: &Path,
        inputs: &[PathBuf],
        outputs: &[PathBuf],
    ) -> CliResult<RunManifest> {
        let digest_all = |paths: &[PathBuf]| -> CliResult<Vec<FileDigest>> {
            paths
                .iter()
                .map(|p| {
                    Ok(FileDigest {
                        path: p.display().to_string(),
                        digest: file_digest_string(p)?,
                    })
                })
                .collect()
        };
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            stage: self.stage,
            master_seed: self.master_seed,
            config: self.config,
            inputs: digest_all(inputs)?,
            outputs: digest_all(outputs)?,
            started_unix_ms: self.started_unix_ms,
            finished_unix_ms: now_ms(),
        };
        let value = serde_json::to_value(&manifest)?;
        let mut bytes = serde_json::to_vec_pretty(&value)?;
        bytes.push(b'\n');
        std::fs::write(manifest_path, bytes)?;
        Ok(manifest)
    }
}

/// `<output>.run.json` next to a stage's primary output.
pub fn run_manifest_path(primary_output: &Path) -> PathBuf {
    let mut name = primary_output
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "stage".to_string());
    name.push_str(".run.json");
    primary_output.with_file_name(name)
}
