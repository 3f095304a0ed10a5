pub mod all;
pub mod ingest;
pub mod pack;
pub mod plan;
pub mod score;
pub mod select;
pub mod stats;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use pmprune_core::metrics::MetricKind;
use pmprune_core::rng::{derive_seed, streams};

use crate::args::CommonArgs;
use crate::config::Config;
use crate::error::{CliError, CliResult};

/// Default master seed; override with `--master-seed` for independent runs.
pub const DEFAULT_MASTER_SEED: u64 = 42;

#[derive(Debug, Clone, Copy)]
pub struct Ctx {
    pub master_seed: u64,
    pub threads: usize,
}

pub fn resolve_common(common: &CommonArgs) -> CliResult<(Config, Ctx)> {
    let config = Config::load(common.config.as_deref())?;
    let master_seed = config.get("master-seed", common.master_seed, DEFAULT_MASTER_SEED)?;
    let threads = config.get("threads", common.threads, 0usize)?;
    Ok((config, Ctx { master_seed, threads }))
}

pub fn require_exists(path: &Path, what: &str) -> CliResult<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::usage(format!(
            "{what} not found: {}",
            path.display()
        )))
    }
}

/// Resolve a metric name. Random scoring derives its seed from the master
/// seed, so identical runs assign identical scores.
pub fn resolve_metric(name: &str, master_seed: u64) -> CliResult<MetricKind> {
    match name {
        "h-index" | "hindex" => Ok(MetricKind::HIndex),
        "sjr" => Ok(MetricKind::Sjr),
        "random" => Ok(MetricKind::Random {
            seed: derive_seed(master_seed, streams::SCORE),
        }),
        other => Err(CliError::usage(format!(
            "unknown metric {other:?} (expected h-index, sjr, or random)"
        ))),
    }
}

/// Resolved configuration snapshot echoed into the run manifest.
#[derive(Debug, Default, Clone)]
pub struct Snapshot(pub BTreeMap<String, String>);

impl Snapshot {
    pub fn put(&mut self, key: &str, value: impl ToString) {
        self.0.insert(key.to_string(), value.to_string());
    }
}

/// Replace the final extension with `stats.json`
/// (`documents.jsonl` → `documents.stats.json`).
pub fn stats_path_for(output: &Path) -> PathBuf {
    output.with_extension("stats.json")
}

pub fn write_json_stable<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let value = serde_json::to_value(value)?;
    let mut bytes = serde_json::to_vec_pretty(&value)?;
    bytes.push(b'\n');
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> CliResult<T> {
    require_exists(path, what)?;
    let bytes = std::fs::read(path)?;
    serde_json::from_slice(&bytes)
        .map_err(|e| CliError::data(format!("{what} {}: {e}", path.display())))
}
