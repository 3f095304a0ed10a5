//! Step budget and learning-rate schedule for a subset run.
//!
//! Every subset trains for the same number of optimizer steps — the number
//! needed for one epoch over the full corpus — so every model sees the same
//! quantity of tokens. Smaller subsets cycle for more epochs with a fresh
//! shuffle seed per epoch.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::rng::{derive_seed, streams};
use crate::{Error, Result};

pub const DEFAULT_PEAK_LR: f64 = 1e-4;
pub const DEFAULT_BATCH_SIZE: u64 = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainPlan {
    pub total_steps: u64,
    #[serde(rename = "batch_size")]
    pub batch_size_sequences: u64,
    pub seq_len: u32,
    /// Exact epoch requirement (steps · batch / subset), reported alongside
    /// the integer schedule.
    pub epochs_exact: f64,
    pub epochs_ceil: u64,
    /// One shuffle seed per epoch, derived from the master seed.
    pub epoch_shuffle_seeds: Vec<u64>,
    /// round(0.1 · total_steps), half up.
    pub warmup_steps: u64,
    pub peak_lr: f64,
    pub schedule: Schedule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_manifest_digest: Option<String>,
    /// Opaque hyperparameters copied verbatim into the plan document.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub hyperparameters: BTreeMap<String, String>,
}

/// Compute the training plan.
///
/// `total_steps = ⌊full_corpus_sequences / batch_size⌋`; the subset runs
/// `⌈total_steps · batch_size / subset_sequences⌉` epochs. Both sequence
/// counts must refer to the same split convention (the CLI uses the
/// post-holdout train counts by default).
pub fn plan(
    full_corpus_sequences: u64,
    subset_sequences: u64,
    batch_size: u64,
    seq_len: u32,
    master_seed: u64,
) -> Result<TrainPlan> {
    if batch_size == 0 {
        return Err(Error::Plan("batch size must be positive".to_string()));
    }
    if subset_sequences == 0 {
        return Err(Error::Plan("subset has no sequences".to_string()));
    }
    if full_corpus_sequences == 0 {
        return Err(Error::Plan("full corpus has no sequences".to_string()));
    }
    if subset_sequences > full_corpus_sequences {
        return Err(Error::Plan(format!(
            "subset ({subset_sequences} sequences) exceeds the full corpus ({full_corpus_sequences})"
        )));
    }
    let total_steps = full_corpus_sequences / batch_size;
    if total_steps == 0 {
        return Err(Error::Plan(format!(
            "batch size {batch_size} exceeds the full corpus ({full_corpus_sequences} sequences)"
        )));
    }
    let token_budget = u128::from(total_steps) * u128::from(batch_size);
    let epochs_ceil = (token_budget.div_ceil(u128::from(subset_sequences))) as u64;
    let epochs_exact = token_budget as f64 / subset_sequences as f64;
    let warmup_steps = (total_steps + 5) / 10;

    let epoch_base = derive_seed(master_seed, streams::EPOCH);
    let epoch_shuffle_seeds = (0..epochs_ceil).map(|e| derive_seed(epoch_base, e)).collect();

    Ok(TrainPlan {
        total_steps,
        batch_size_sequences: batch_size,
        seq_len,
        epochs_exact,
        epochs_ceil,
        epoch_shuffle_seeds,
        warmup_steps,
        peak_lr: DEFAULT_PEAK_LR,
        schedule: Schedule::Linear,
        source_manifest_digest: None,
        hyperparameters: BTreeMap::new(),
    })
}

/// Learning rate at `step`: linear from 0 to `peak_lr` over the warmup,
/// then linear back to 0 at `total_steps`. Exact at all three corners.
pub fn lr_at(step: u64, plan: &TrainPlan) -> Result<f64> {
    if step > plan.total_steps {
        return Err(Error::Plan(format!(
            "step {step} is out of range (total {})",
            plan.total_steps
        )));
    }
    if step < plan.warmup_steps {
        return Ok(plan.peak_lr * step as f64 / plan.warmup_steps as f64);
    }
    if plan.total_steps == plan.warmup_steps {
        return Ok(plan.peak_lr);
    }
    Ok(plan.peak_lr * (plan.total_steps - step) as f64
        / (plan.total_steps - plan.warmup_steps) as f64)
}
