use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "pmprune",
    version,
    about = "Build quality-pruned pre-training corpora from PubMed-style baselines"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Parse baseline XML archives into filtered documents
    Ingest(IngestArgs),
    /// Assign journal-impact or random scores to documents
    Score(ScoreArgs),
    /// Materialize a percentile-window subset of the scored corpus
    Select(SelectArgs),
    /// Tokenize documents and pack them into fixed-length sequences
    Pack(PackArgs),
    /// Compute the step budget and LR schedule for a subset
    Plan(PlanArgs),
    /// Corpus statistics report
    Stats(StatsArgs),
    /// Run every stage for one (metric, part, fraction) configuration
    All(AllArgs),
}

#[derive(Args)]
pub struct CommonArgs {
    /// Plain-text `key = value` config file; flags override file values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores). Never affects output bytes.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Master seed for every derived random stream
    #[arg(long)]
    pub master_seed: Option<u64>,
}

#[derive(Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Baseline XML archives (.xml or .xml.gz)
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Filtered documents file (JSONL, pmid-sorted)
    #[arg(long, default_value = "documents.jsonl")]
    pub output: PathBuf,
    /// Drop article titles from the document text
    #[arg(long)]
    pub no_include_title: bool,
}

#[derive(Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value = "documents.jsonl")]
    pub documents: PathBuf,
    /// Score metric: h-index, sjr, or random
    #[arg(long)]
    pub metric: Option<String>,
    /// Journal metrics table (semicolon-delimited)
    #[arg(long)]
    pub journal_table: Option<PathBuf>,
    /// Drop documents whose journal is missing from the table instead of
    /// scoring them 0
    #[arg(long)]
    pub drop_unscored: bool,
    #[arg(long, default_value = "scored.jsonl")]
    pub output: PathBuf,
}

#[derive(Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value = "scored.jsonl")]
    pub scored: PathBuf,
    /// Score metric recorded in the subset spec
    #[arg(long)]
    pub metric: Option<String>,
    /// Distribution part: top, mid, or bottom
    #[arg(long)]
    pub part: Option<String>,
    /// Fraction of documents to keep, e.g. 0.25 or 0.5
    #[arg(long)]
    pub fraction: Option<String>,
    #[arg(long, default_value = "subset.manifest.json")]
    pub output: PathBuf,
    /// Pmid lists longer than this move to a binary sidecar file
    #[arg(long)]
    pub inline_pmid_limit: Option<usize>,
}

#[derive(Args)]
pub struct PackArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value = "documents.jsonl")]
    pub documents: PathBuf,
    /// WordPiece vocabulary file (one token per line)
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Subset manifest restricting which documents are packed
    #[arg(long)]
    pub subset: Option<PathBuf>,
    /// Output prefix; writes <prefix>.train.pksq and <prefix>.valid.pksq
    #[arg(long, default_value = "packed")]
    pub output_prefix: PathBuf,
    #[arg(long)]
    pub seq_len: Option<u32>,
    /// Validation holdout, e.g. 0.05
    #[arg(long)]
    pub validation_ratio: Option<String>,
    /// Pad the final partial sequence instead of dropping it
    #[arg(long)]
    pub pad_final: bool,
    /// Literal concatenation: no [CLS]/[SEP] framing, no separators
    #[arg(long)]
    pub raw_concat: bool,
}

#[derive(Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Packed train file of the full corpus (header supplies the count)
    #[arg(long, conflicts_with = "full_sequences")]
    pub full_packed: Option<PathBuf>,
    #[arg(long)]
    pub full_sequences: Option<u64>,
    /// Packed train file of the subset
    #[arg(long, conflicts_with = "subset_sequences")]
    pub subset_packed: Option<PathBuf>,
    #[arg(long)]
    pub subset_sequences: Option<u64>,
    #[arg(long)]
    pub batch_size: Option<u64>,
    #[arg(long)]
    pub seq_len: Option<u32>,
    #[arg(long)]
    pub peak_lr: Option<f64>,
    /// Subset manifest whose digest the plan records
    #[arg(long)]
    pub source_manifest: Option<PathBuf>,
    /// Extra `name=value` hyperparameters copied into the plan
    #[arg(long = "hyperparameter")]
    pub hyperparameters: Vec<String>,
    #[arg(long, default_value = "plan.json")]
    pub output: PathBuf,
}

#[derive(Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value = "documents.jsonl")]
    pub documents: PathBuf,
    #[arg(long, default_value = "scored.jsonl")]
    pub scored: PathBuf,
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Ingest stats JSON (written by the ingest stage)
    #[arg(long)]
    pub ingest_stats: Option<PathBuf>,
    /// Score stats JSON (written by the score stage)
    #[arg(long)]
    pub score_stats: Option<PathBuf>,
    /// Output format: json or text-table
    #[arg(long)]
    pub format: Option<String>,
    /// Report file; stdout when omitted
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct AllArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Baseline XML archives (.xml or .xml.gz)
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub journal_table: Option<PathBuf>,
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub metric: Option<String>,
    #[arg(long)]
    pub part: Option<String>,
    #[arg(long)]
    pub fraction: Option<String>,
    /// Directory for every stage output
    #[arg(long, default_value = "pmprune-work")]
    pub workdir: PathBuf,
    #[arg(long)]
    pub no_include_title: bool,
    #[arg(long)]
    pub drop_unscored: bool,
    #[arg(long)]
    pub seq_len: Option<u32>,
    #[arg(long)]
    pub validation_ratio: Option<String>,
    #[arg(long)]
    pub pad_final: bool,
    #[arg(long)]
    pub raw_concat: bool,
    #[arg(long)]
    pub batch_size: Option<u64>,
    #[arg(long)]
    pub peak_lr: Option<f64>,
    /// Compute the step budget on pre-holdout sequence counts
    #[arg(long)]
    pub steps_pre_holdout: bool,
    #[arg(long = "hyperparameter")]
    pub hyperparameters: Vec<String>,
    /// Report format: json or text-table
    #[arg(long)]
    pub format: Option<String>,
}
