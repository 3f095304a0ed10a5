mod args;
mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;

use clap::Parser;

use pmprune_core::report::ReportFormat;
use pmprune_core::select::Part;
use pmprune_core::Quantile;

use args::{Cli, Command};
use commands::{resolve_common, resolve_metric, stats_path_for, Ctx, Snapshot};
use config::Config;
use error::{CliError, CliResult};
use manifest::{run_manifest_path, RunManifestBuilder};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    std::process::exit(0);
                }
                _ => {
                    eprint!("{e}");
                    std::process::exit(1);
                }
            }
        }
    };
    if let Err(e) = dispatch(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn init_threads(ctx: &Ctx) {
    if ctx.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(ctx.threads)
            .build_global();
    }
}

fn parse_quantile(value: &str, what: &str) -> CliResult<Quantile> {
    value
        .parse()
        .map_err(|e| CliError::usage(format!("invalid {what} {value:?}: {e}")))
}

fn parse_part(value: &str) -> CliResult<Part> {
    value
        .parse()
        .map_err(|_| CliError::usage(format!("unknown part {value:?} (expected top, mid, or bottom)")))
}

fn parse_format(value: &str) -> CliResult<ReportFormat> {
    value
        .parse()
        .map_err(|_| CliError::usage(format!("unknown format {value:?} (expected json or text-table)")))
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Ingest(args) => {
            let (config, ctx) = resolve_common(&args.common)?;
            init_threads(&ctx);
            let include_title = resolve_include_title(&config, args.no_include_title)?;
            let opts = commands::ingest::IngestOpts {
                inputs: args.inputs,
                output: args.output,
                include_title,
            };
            let mut snapshot = Snapshot::default();
            snapshot.put("include-title", include_title);
            let outcome = commands::ingest::run(&opts)?;
            write_stage_manifest(
                "ingest",
                &ctx,
                snapshot,
                &opts.output,
                opts.inputs.clone(),
                vec![opts.output.clone(), outcome.stats_path],
            )?;
            eprintln!(
                "ingest: {} records, {} kept, {} duplicates collapsed",
                outcome.stats.records_parsed + outcome.stats.duplicate_pmids,
                outcome.stats.documents_kept,
                outcome.stats.duplicate_pmids
            );
            Ok(())
        }
        Command::Score(args) => {
            let (config, ctx) = resolve_common(&args.common)?;
            init_threads(&ctx);
            let metric_name =
                config
                    .get_string("metric", args.metric)
                    .ok_or_else(|| CliError::usage("--metric is required (h-index, sjr, or random)"))?;
            let metric = resolve_metric(&metric_name, ctx.master_seed)?;
            let journal_table = config
                .get_opt("journal-table", args.journal_table.map(path_ok))?
                .map(PathBuf::from);
            let drop_unscored = config.get_switch("drop-unscored", args.drop_unscored, false)?;
            let opts = commands::score::ScoreOpts {
                documents: args.documents,
                journal_table,
                metric,
                drop_unscored,
                output: args.output,
            };
            let mut snapshot = Snapshot::default();
            snapshot.put("metric", metric_name);
            snapshot.put("drop-unscored", drop_unscored);
            let outcome = commands::score::run(&opts)?;
            let mut inputs = vec![opts.documents.clone()];
            inputs.extend(opts.journal_table.clone());
            write_stage_manifest(
                "score",
                &ctx,
                snapshot,
                &opts.output,
                inputs,
                vec![opts.output.clone(), outcome.stats_path],
            )?;
            eprintln!(
                "score: {} matched, {} unmatched",
                outcome.stats.coverage.matched, outcome.stats.coverage.unmatched
            );
            Ok(())
        }
        Command::Select(args) => {
            let (config, ctx) = resolve_common(&args.common)?;
            init_threads(&ctx);
            let metric_name = config
                .get_string("metric", args.metric)
                .ok_or_else(|| CliError::usage("--metric is required"))?;
            let metric = resolve_metric(&metric_name, ctx.master_seed)?;
            let part_name = config
                .get_string("part", args.part)
                .ok_or_else(|| CliError::usage("--part is required (top, mid, or bottom)"))?;
            let part = parse_part(&part_name)?;
            let fraction_str = config
                .get_string("fraction", args.fraction)
                .ok_or_else(|| CliError::usage("--fraction is required, e.g. 0.25"))?;
            let fraction = parse_quantile(&fraction_str, "fraction")?;
            let inline_pmid_limit = config.get(
                "inline-pmid-limit",
                args.inline_pmid_limit,
                commands::select::SelectOpts::default_inline_limit(),
            )?;
            let opts = commands::select::SelectOpts {
                scored: args.scored,
                metric,
                part,
                fraction,
                output: args.output,
                inline_pmid_limit,
            };
            let mut snapshot = Snapshot::default();
            snapshot.put("metric", metric_name);
            snapshot.put("part", part.as_str());
            snapshot.put("fraction", &fraction_str);
            let outcome = commands::select::run(&opts)?;
            write_stage_manifest(
                "select",
                &ctx,
                snapshot,
                &opts.output,
                vec![opts.scored.clone()],
                vec![opts.output.clone()],
            )?;
            eprintln!(
                "select: window [{}, {}) kept {} of {}",
                outcome.lower, outcome.upper, outcome.selected, outcome.total
            );
            Ok(())
        }
        Command::Pack(args) => {
            let (config, ctx) = resolve_common(&args.common)?;
            init_threads(&ctx);
            let vocab = config
                .get_opt("vocab", args.vocab.map(path_ok))?
                .map(PathBuf::from)
                .ok_or_else(|| CliError::usage("--vocab is required"))?;
            let seq_len = config.get("seq-len", args.seq_len, 512u32)?;
            let ratio_str = config
                .get_string("validation-ratio", args.validation_ratio)
                .unwrap_or_else(|| "0.05".to_string());
            let validation_ratio = parse_quantile(&ratio_str, "validation ratio")?;
            let pad_final = config.get_switch("pad-final", args.pad_final, false)?;
            let raw_concat = config.get_switch("raw-concat", args.raw_concat, false)?;
            let opts = commands::pack::PackOpts {
                documents: args.documents,
                vocab,
                subset: args.subset,
                output_prefix: args.output_prefix,
                seq_len,
                validation_ratio,
                pad_final,
                raw_concat,
                master_seed: ctx.master_seed,
            };
            let mut snapshot = Snapshot::default();
            snapshot.put("seq-len", seq_len);
            snapshot.put("validation-ratio", &ratio_str);
            snapshot.put("pad-final", pad_final);
            snapshot.put("raw-concat", raw_concat);
            let outcome = commands::pack::run(&opts)?;
            let mut inputs = vec![opts.documents.clone(), opts.vocab.clone()];
            inputs.extend(opts.subset.clone());
            write_stage_manifest(
                "pack",
                &ctx,
                snapshot,
                &outcome.train_path,
                inputs,
                vec![
                    outcome.train_path.clone(),
                    outcome.valid_path.clone(),
                    outcome.stats_path.clone(),
                ],
            )?;
            eprintln!(
                "pack: {} sequences ({} train, {} valid), {} tokens dropped",
                outcome.stats.sequences_total,
                outcome.stats.train_sequences,
                outcome.stats.valid_sequences,
                outcome.stats.dropped_tokens
            );
            Ok(())
        }
        Command::Plan(args) => {
            let (config, ctx) = resolve_common(&args.common)?;
            init_threads(&ctx);
            let full = count_source(args.full_packed, args.full_sequences, "--full-packed or --full-sequences")?;
            let subset = count_source(
                args.subset_packed,
                args.subset_sequences,
                "--subset-packed or --subset-sequences",
            )?;
            let batch_size = config.get("batch-size", args.batch_size, 8192u64)?;
            let seq_len = config.get_opt("seq-len", args.seq_len)?;
            let peak_lr = config.get("peak-lr", args.peak_lr, pmprune_core::plan::DEFAULT_PEAK_LR)?;
            let hyperparameters =
                commands::plan::parse_hyperparameters(&args.hyperparameters, config.hyperparameters())?;
            let opts = commands::plan::PlanOpts {
                full,
                subset,
                batch_size,
                seq_len,
                peak_lr,
                source_manifest: args.source_manifest,
                hyperparameters,
                output: args.output,
                master_seed: ctx.master_seed,
            };
            let mut snapshot = Snapshot::default();
            snapshot.put("batch-size", batch_size);
            snapshot.put("peak-lr", peak_lr);
            let train_plan = commands::plan::run(&opts)?;
            let mut inputs = Vec::new();
            for source in [&opts.full, &opts.subset] {
                if let commands::plan::CountSource::Packed(p) = source {
                    inputs.push(p.clone());
                }
            }
            inputs.extend(opts.source_manifest.clone());
            write_stage_manifest(
                "plan",
                &ctx,
                snapshot,
                &opts.output,
                inputs,
                vec![opts.output.clone()],
            )?;
            eprintln!(
                "plan: {} steps, {} epochs (exact {:.4}), warmup {}",
                train_plan.total_steps,
                train_plan.epochs_ceil,
                train_plan.epochs_exact,
                train_plan.warmup_steps
            );
            Ok(())
        }
        Command::Stats(args) => {
            let (config, ctx) = resolve_common(&args.common)?;
            init_threads(&ctx);
            let vocab = config
                .get_opt("vocab", args.vocab.map(path_ok))?
                .map(PathBuf::from)
                .ok_or_else(|| CliError::usage("--vocab is required"))?;
            let format_name = config
                .get_string("format", args.format)
                .unwrap_or_else(|| "json".to_string());
            let format = parse_format(&format_name)?;
            let ingest_stats = args
                .ingest_stats
                .unwrap_or_else(|| stats_path_for(&args.documents));
            let score_stats = args
                .score_stats
                .unwrap_or_else(|| stats_path_for(&args.scored));
            let opts = commands::stats::StatsOpts {
                documents: args.documents,
                scored: args.scored,
                vocab,
                ingest_stats,
                score_stats,
                format,
                output: args.output,
            };
            let mut snapshot = Snapshot::default();
            snapshot.put("format", &format_name);
            let stats = commands::stats::run(&opts)?;
            if let Some(output) = &opts.output {
                write_stage_manifest(
                    "stats",
                    &ctx,
                    snapshot,
                    output,
                    vec![
                        opts.documents.clone(),
                        opts.scored.clone(),
                        opts.vocab.clone(),
                        opts.ingest_stats.clone(),
                        opts.score_stats.clone(),
                    ],
                    vec![output.clone()],
                )?;
            }
            eprintln!(
                "stats: {} documents, {} tokens",
                stats.documents_kept, stats.total_tokens
            );
            Ok(())
        }
        Command::All(args) => {
            let (config, ctx) = resolve_common(&args.common)?;
            init_threads(&ctx);
            let metric_name = config
                .get_string("metric", args.metric)
                .ok_or_else(|| CliError::usage("--metric is required"))?;
            let metric = resolve_metric(&metric_name, ctx.master_seed)?;
            let part_name = config
                .get_string("part", args.part)
                .ok_or_else(|| CliError::usage("--part is required"))?;
            let part = parse_part(&part_name)?;
            let fraction_str = config
                .get_string("fraction", args.fraction)
                .ok_or_else(|| CliError::usage("--fraction is required"))?;
            let fraction = parse_quantile(&fraction_str, "fraction")?;
            let vocab = config
                .get_opt("vocab", args.vocab.map(path_ok))?
                .map(PathBuf::from)
                .ok_or_else(|| CliError::usage("--vocab is required"))?;
            let journal_table = config
                .get_opt("journal-table", args.journal_table.map(path_ok))?
                .map(PathBuf::from);
            let include_title = resolve_include_title(&config, args.no_include_title)?;
            let drop_unscored = config.get_switch("drop-unscored", args.drop_unscored, false)?;
            let seq_len = config.get("seq-len", args.seq_len, 512u32)?;
            let ratio_str = config
                .get_string("validation-ratio", args.validation_ratio)
                .unwrap_or_else(|| "0.05".to_string());
            let validation_ratio = parse_quantile(&ratio_str, "validation ratio")?;
            let pad_final = config.get_switch("pad-final", args.pad_final, false)?;
            let raw_concat = config.get_switch("raw-concat", args.raw_concat, false)?;
            let batch_size = config.get("batch-size", args.batch_size, 8192u64)?;
            let peak_lr = config.get("peak-lr", args.peak_lr, pmprune_core::plan::DEFAULT_PEAK_LR)?;
            let steps_pre_holdout =
                config.get_switch("steps-pre-holdout", args.steps_pre_holdout, false)?;
            let format_name = config
                .get_string("format", args.format)
                .unwrap_or_else(|| "json".to_string());
            let format = parse_format(&format_name)?;
            let hyperparameters =
                commands::plan::parse_hyperparameters(&args.hyperparameters, config.hyperparameters())?;

            let opts = commands::all::AllOpts {
                inputs: args.inputs,
                journal_table,
                vocab,
                metric,
                part,
                fraction,
                workdir: args.workdir,
                include_title,
                drop_unscored,
                seq_len,
                validation_ratio,
                pad_final,
                raw_concat,
                batch_size,
                peak_lr,
                steps_pre_holdout,
                hyperparameters,
                format,
                master_seed: ctx.master_seed,
            };
            let mut snapshot = Snapshot::default();
            snapshot.put("metric", metric_name);
            snapshot.put("part", part.as_str());
            snapshot.put("fraction", &fraction_str);
            snapshot.put("include-title", include_title);
            snapshot.put("drop-unscored", drop_unscored);
            snapshot.put("seq-len", seq_len);
            snapshot.put("validation-ratio", &ratio_str);
            snapshot.put("pad-final", pad_final);
            snapshot.put("raw-concat", raw_concat);
            snapshot.put("batch-size", batch_size);
            snapshot.put("peak-lr", peak_lr);
            snapshot.put("steps-pre-holdout", steps_pre_holdout);
            snapshot.put("format", &format_name);

            let outcome = commands::all::run(&opts)?;
            let mut inputs = opts.inputs.clone();
            inputs.push(opts.vocab.clone());
            inputs.extend(opts.journal_table.clone());
            let manifest_path = opts.workdir.join("run.manifest.json");
            RunManifestBuilder::new("all", ctx.master_seed, snapshot.0)
                .write(&manifest_path, &inputs, &outcome.outputs)?;
            eprintln!(
                "all: done; {} steps, {} epochs; manifest at {}",
                outcome.plan.total_steps,
                outcome.plan.epochs_ceil,
                manifest_path.display()
            );
            Ok(())
        }
    }
}

fn resolve_include_title(config: &Config, no_include_title: bool) -> CliResult<bool> {
    if no_include_title {
        return Ok(false);
    }
    config.get("include-title", None, true)
}

fn count_source(
    packed: Option<PathBuf>,
    count: Option<u64>,
    what: &str,
) -> CliResult<commands::plan::CountSource> {
    match (packed, count) {
        (Some(path), None) => Ok(commands::plan::CountSource::Packed(path)),
        (None, Some(n)) => Ok(commands::plan::CountSource::Count(n)),
        (None, None) => Err(CliError::usage(format!("{what} is required"))),
        (Some(_), Some(_)) => Err(CliError::usage(format!("{what}: give only one"))),
    }
}

fn path_ok(p: PathBuf) -> String {
    p.display().to_string()
}

fn write_stage_manifest(
    stage: &str,
    ctx: &Ctx,
    snapshot: Snapshot,
    primary_output: &std::path::Path,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
) -> CliResult<()> {
    let path = run_manifest_path(primary_output);
    let mut config = snapshot.0;
    config.insert("master-seed".to_string(), ctx.master_seed.to_string());
    RunManifestBuilder::new(stage, ctx.master_seed, config).write(&path, &inputs, &outputs)?;
    Ok(())
}
