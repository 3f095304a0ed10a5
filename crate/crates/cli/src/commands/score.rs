//! `pmprune score`: join journal metrics (or seeded random scores) onto the
//! document stream.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use pmprune_core::ingest::Document;
use pmprune_core::metrics::{score_documents, Coverage, JournalTable, MetricKind, TableStats};
use pmprune_core::store::{read_documents, write_scored};

use super::{require_exists, stats_path_for};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct ScoreOpts {
    pub documents: PathBuf,
    pub journal_table: Option<PathBuf>,
    pub metric: MetricKind,
    pub drop_unscored: bool,
    pub output: PathBuf,
}

/// Sidecar consumed by the stats stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreStatsFile {
    pub metric: MetricKind,
    pub coverage: Coverage,
    pub documents_scored: u64,
    pub documents_dropped: u64,
    #[serde(default)]
    pub table_entries: u64,
    #[serde(default)]
    pub table_stats: TableStats,
}

pub struct ScoreOutcome {
    pub stats: ScoreStatsFile,
    pub stats_path: PathBuf,
}

pub fn run(opts: &ScoreOpts) -> CliResult<ScoreOutcome> {
    require_exists(&opts.documents, "documents file")?;
    let table = match (&opts.journal_table, opts.metric.needs_table()) {
        (Some(path), _) => {
            require_exists(path, "journal table")?;
            Some(JournalTable::load(BufReader::new(File::open(path)?))?)
        }
        (None, true) => {
            return Err(CliError::usage(format!(
                "metric {} requires --journal-table",
                opts.metric.name()
            )))
        }
        (None, false) => None,
    };

    let documents: Vec<Document> = read_documents(BufReader::new(File::open(&opts.documents)?))
        .collect::<pmprune_core::Result<_>>()?;

    let (scored, coverage) =
        score_documents(&documents, opts.metric, table.as_ref(), opts.drop_unscored)?;

    let mut out = BufWriter::new(File::create(&opts.output)?);
    write_scored(&mut out, &scored)?;
    drop(out);

    let stats = ScoreStatsFile {
        metric: opts.metric,
        coverage,
        documents_scored: scored.len() as u64,
        documents_dropped: documents.len() as u64 - scored.len() as u64,
        table_entries: table.as_ref().map_or(0, |t| t.len() as u64),
        table_stats: table.as_ref().map_or_else(TableStats::default, |t| t.stats),
    };
    let stats_path = stats_path_for(&opts.output);
    super::write_json_stable(&stats_path, &stats)?;

    Ok(ScoreOutcome { stats, stats_path })
}
