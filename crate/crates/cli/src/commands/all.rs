//! `pmprune all`: chain every stage for one (metric, part, fraction)
//! configuration inside a work directory.
//!
//! Stage outputs are identical to running the subcommands individually in
//! order — `all` calls the same stage functions on the same file formats.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pmprune_core::metrics::MetricKind;
use pmprune_core::report::ReportFormat;
use pmprune_core::select::Part;
use pmprune_core::Quantile;

use super::{ingest, pack, plan, score, select, stats};
use crate::error::CliResult;

#[derive(Debug, Clone)]
pub struct AllOpts {
    pub inputs: Vec<PathBuf>,
    pub journal_table: Option<PathBuf>,
    pub vocab: PathBuf,
    pub metric: MetricKind,
    pub part: Part,
    pub fraction: Quantile,
    pub workdir: PathBuf,
    pub include_title: bool,
    pub drop_unscored: bool,
    pub seq_len: u32,
    pub validation_ratio: Quantile,
    pub pad_final: bool,
    pub raw_concat: bool,
    pub batch_size: u64,
    pub peak_lr: f64,
    /// Use pre-holdout sequence totals for the step budget.
    pub steps_pre_holdout: bool,
    pub hyperparameters: BTreeMap<String, String>,
    pub format: ReportFormat,
    pub master_seed: u64,
}

pub struct AllOutcome {
    /// Every data artifact the pipeline produced, for the run manifest.
    pub outputs: Vec<PathBuf>,
    pub plan: pmprune_core::TrainPlan,
}

pub fn run(opts: &AllOpts) -> CliResult<AllOutcome> {
    std::fs::create_dir_all(&opts.workdir)?;
    let path = |name: &str| opts.workdir.join(name);
    let mut outputs: Vec<PathBuf> = Vec::new();

    // 1. ingest
    let documents = path("documents.jsonl");
    let ingest_out = ingest::run(&ingest::IngestOpts {
        inputs: opts.inputs.clone(),
        output: documents.clone(),
        include_title: opts.include_title,
    })?;
    outputs.extend([documents.clone(), ingest_out.stats_path.clone()]);

    // 2. score
    let scored = path("scored.jsonl");
    let score_out = score::run(&score::ScoreOpts {
        documents: documents.clone(),
        journal_table: opts.journal_table.clone(),
        metric: opts.metric,
        drop_unscored: opts.drop_unscored,
        output: scored.clone(),
    })?;
    outputs.extend([scored.clone(), score_out.stats_path.clone()]);

    // 3. select
    let subset_manifest = path("subset.manifest.json");
    select::run(&select::SelectOpts {
        scored: scored.clone(),
        metric: opts.metric,
        part: opts.part,
        fraction: opts.fraction,
        output: subset_manifest.clone(),
        inline_pmid_limit: select::SelectOpts::default_inline_limit(),
    })?;
    outputs.push(subset_manifest.clone());

    // 4. pack the full corpus (the step-budget denominator) and the subset.
    let pack_common = |prefix: PathBuf, subset: Option<PathBuf>| pack::PackOpts {
        documents: documents.clone(),
        vocab: opts.vocab.clone(),
        subset,
        output_prefix: prefix,
        seq_len: opts.seq_len,
        validation_ratio: opts.validation_ratio,
        pad_final: opts.pad_final,
        raw_concat: opts.raw_concat,
        master_seed: opts.master_seed,
    };
    let full_out = pack::run(&pack_common(path("full"), None))?;
    let subset_out = pack::run(&pack_common(path("subset"), Some(subset_manifest.clone())))?;
    for out in [&full_out, &subset_out] {
        outputs.extend([
            out.train_path.clone(),
            out.valid_path.clone(),
            out.stats_path.clone(),
        ]);
    }

    // 5. plan
    let (full_count, subset_count) = if opts.steps_pre_holdout {
        (
            full_out.stats.sequences_total,
            subset_out.stats.sequences_total,
        )
    } else {
        (
            full_out.stats.train_sequences,
            subset_out.stats.train_sequences,
        )
    };
    let plan_path = path("plan.json");
    let train_plan = plan::run(&plan::PlanOpts {
        full: plan::CountSource::Count(full_count),
        subset: plan::CountSource::Count(subset_count),
        batch_size: opts.batch_size,
        seq_len: Some(opts.seq_len),
        peak_lr: opts.peak_lr,
        source_manifest: Some(subset_manifest.clone()),
        hyperparameters: opts.hyperparameters.clone(),
        output: plan_path.clone(),
        master_seed: opts.master_seed,
    })?;
    outputs.push(plan_path);

    // 6. stats
    let report_name = match opts.format {
        ReportFormat::Json => "report.json",
        ReportFormat::TextTable => "report.txt",
    };
    let report_path = path(report_name);
    stats::run(&stats::StatsOpts {
        documents,
        scored,
        vocab: opts.vocab.clone(),
        ingest_stats: ingest_out.stats_path,
        score_stats: score_out.stats_path,
        format: opts.format,
        output: Some(report_path.clone()),
    })?;
    outputs.push(report_path);

    Ok(AllOutcome {
        outputs,
        plan: train_plan,
    })
}
