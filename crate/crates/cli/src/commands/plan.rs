//! `pmprune plan`: step budget, epoch schedule, and LR parameters for a
//! subset run.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pmprune_core::digest::file_digest_string;
use pmprune_core::pksq::read_header;
use pmprune_core::plan::{plan, TrainPlan};

use super::require_exists;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
pub enum CountSource {
    Packed(PathBuf),
    Count(u64),
}

#[derive(Debug, Clone)]
pub struct PlanOpts {
    pub full: CountSource,
    pub subset: CountSource,
    pub batch_size: u64,
    /// Required when no packed file supplies it.
    pub seq_len: Option<u32>,
    pub peak_lr: f64,
    pub source_manifest: Option<PathBuf>,
    pub hyperparameters: BTreeMap<String, String>,
    pub output: PathBuf,
    pub master_seed: u64,
}

fn resolve_count(source: &CountSource, what: &str) -> CliResult<(u64, Option<u32>)> {
    match source {
        CountSource::Count(n) => Ok((*n, None)),
        CountSource::Packed(path) => {
            require_exists(path, what)?;
            let header = read_header(path)?;
            Ok((header.count, Some(header.seq_len)))
        }
    }
}

pub fn run(opts: &PlanOpts) -> CliResult<TrainPlan> {
    let (full_sequences, full_seq_len) = resolve_count(&opts.full, "full packed file")?;
    let (subset_sequences, subset_seq_len) = resolve_count(&opts.subset, "subset packed file")?;

    let seq_len = match (full_seq_len, subset_seq_len, opts.seq_len) {
        (Some(a), Some(b), _) if a != b => {
            return Err(CliError::data(format!(
                "packed files disagree on seq_len ({a} vs {b})"
            )))
        }
        (Some(a), _, Some(flag)) if a != flag => {
            return Err(CliError::data(format!(
                "--seq-len {flag} does not match the packed file ({a})"
            )))
        }
        (Some(a), _, _) => a,
        (None, Some(b), _) => b,
        (None, None, Some(flag)) => flag,
        (None, None, None) => 512,
    };

    let mut train_plan = plan(
        full_sequences,
        subset_sequences,
        opts.batch_size,
        seq_len,
        opts.master_seed,
    )?;
    train_plan.peak_lr = opts.peak_lr;
    train_plan.hyperparameters = opts.hyperparameters.clone();
    if let Some(manifest) = &opts.source_manifest {
        require_exists(manifest, "subset manifest")?;
        train_plan.source_manifest_digest = Some(file_digest_string(manifest)?);
    }

    super::write_json_stable(&opts.output, &train_plan)?;
    Ok(train_plan)
}

/// Parse repeated `name=value` hyperparameter flags.
pub fn parse_hyperparameters(
    flags: &[String],
    from_config: BTreeMap<String, String>,
) -> CliResult<BTreeMap<String, String>> {
    let mut merged = from_config;
    for flag in flags {
        let Some((name, value)) = flag.split_once('=') else {
            return Err(CliError::usage(format!(
                "--hyperparameter expects name=value, got {flag:?}"
            )));
        };
        merged.insert(name.trim().to_string(), value.trim().to_string());
    }
    Ok(merged)
}
