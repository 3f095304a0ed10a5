//! `pmprune stats`: exact corpus statistics report.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;

use pmprune_core::ingest::Document;
use pmprune_core::metrics::ScoredDocument;
use pmprune_core::report::{corpus_stats, render_report, CorpusStats, IngestStats, ReportFormat};
use pmprune_core::store::{read_documents, read_scored};
use pmprune_core::tokenize::tokenize_batch;
use pmprune_core::vocab::Vocabulary;

use super::score::ScoreStatsFile;
use super::{read_json, require_exists};
use crate::error::CliResult;

#[derive(Debug, Clone)]
pub struct StatsOpts {
    pub documents: PathBuf,
    pub scored: PathBuf,
    pub vocab: PathBuf,
    pub ingest_stats: PathBuf,
    pub score_stats: PathBuf,
    pub format: ReportFormat,
    /// Stdout when absent.
    pub output: Option<PathBuf>,
}

pub fn run(opts: &StatsOpts) -> CliResult<CorpusStats> {
    require_exists(&opts.documents, "documents file")?;
    require_exists(&opts.scored, "scored file")?;
    require_exists(&opts.vocab, "vocabulary file")?;
    let vocab = Vocabulary::from_bytes(&std::fs::read(&opts.vocab)?)?;
    let ingest: IngestStats = read_json(&opts.ingest_stats, "ingest stats")?;
    let score: ScoreStatsFile = read_json(&opts.score_stats, "score stats")?;

    let documents: Vec<Document> = read_documents(BufReader::new(File::open(&opts.documents)?))
        .collect::<pmprune_core::Result<_>>()?;
    let texts: Vec<&str> = documents.iter().map(|d| d.text.as_str()).collect();
    let token_counts: Vec<u64> = tokenize_batch(&texts, &vocab)
        .iter()
        .map(|ids| ids.len() as u64)
        .collect();

    let scored: Vec<ScoredDocument> = read_scored(BufReader::new(File::open(&opts.scored)?))
        .collect::<pmprune_core::Result<_>>()?;

    let stats = corpus_stats(&ingest, &token_counts, &scored, score.coverage)?;
    let rendered = render_report(&stats, opts.format)?;
    match &opts.output {
        Some(path) => std::fs::write(path, &rendered)?,
        None => std::io::stdout().write_all(&rendered)?,
    }
    Ok(stats)
}
