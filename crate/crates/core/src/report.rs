//! Corpus and subset statistics.
//!
//! Aggregates are exact (no sampling) and order-independent, so partial
//! stats from parallel shards can be merged in any order.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::metrics::{Coverage, ScoredDocument};
use crate::quantile::Quantile;
use crate::{Error, Result};

/// Filter rejections by reason.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionCounts {
    pub not_english: u64,
    pub no_abstract_text: u64,
    pub no_issn: u64,
}

impl RejectionCounts {
    pub fn total(&self) -> u64 {
        self.not_english + self.no_abstract_text + self.no_issn
    }
}

/// Counters produced by the ingest stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub records_parsed: u64,
    pub documents_kept: u64,
    pub rejections: RejectionCounts,
    /// Re-occurring pmids collapsed by last-record-wins.
    pub duplicate_pmids: u64,
}

/// Token-count histogram bucket `[min, max)`; the last bucket is open.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramBucket {
    pub min: u64,
    pub max: Option<u64>,
    pub count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PercentileEntry {
    pub quantile: Quantile,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub documents_parsed: u64,
    pub documents_kept: u64,
    pub rejections: RejectionCounts,
    pub duplicate_pmids: u64,
    pub total_tokens: u64,
    /// Powers-of-two buckets from 16 to 4096.
    pub token_histogram: Vec<HistogramBucket>,
    pub metric_coverage: Coverage,
    pub score_percentiles: Vec<PercentileEntry>,
}

/// Histogram edges: 16, 32, ..., 4096.
fn histogram_edges() -> Vec<u64> {
    (4..=12).map(|p| 1u64 << p).collect()
}

fn empty_histogram() -> Vec<HistogramBucket> {
    let edges = histogram_edges();
    let mut buckets = Vec::with_capacity(edges.len() + 1);
    let mut lo = 0;
    for &edge in &edges {
        buckets.push(HistogramBucket {
            min: lo,
            max: Some(edge),
            count: 0,
        });
        lo = edge;
    }
    buckets.push(HistogramBucket {
        min: lo,
        max: None,
        count: 0,
    });
    buckets
}

fn bucket_index(edges: &[u64], tokens: u64) -> usize {
    edges.partition_point(|&edge| edge <= tokens)
}

/// The standard percentile grid reported for score distributions.
pub fn default_quantiles() -> Vec<Quantile> {
    (0..=8)
        .map(|i| Quantile::new(i, 8).expect("i/8 is a valid quantile"))
        .collect()
}

/// Aggregate exact corpus statistics.
///
/// `token_counts` holds one entry per kept document (any order);
/// `scored` holds the scored documents the percentile table describes.
pub fn corpus_stats(
    ingest: &IngestStats,
    token_counts: &[u64],
    scored: &[ScoredDocument],
    coverage: Coverage,
) -> Result<CorpusStats> {
    if token_counts.len() as u64 != ingest.documents_kept {
        return Err(Error::Stats(format!(
            "{} token counts for {} kept documents",
            token_counts.len(),
            ingest.documents_kept
        )));
    }
    if ingest.documents_kept + ingest.rejections.total() != ingest.records_parsed {
        return Err(Error::Stats(
            "kept + rejected does not equal parsed".to_string(),
        ));
    }

    let edges = histogram_edges();
    let mut histogram = empty_histogram();
    let mut total_tokens = 0u64;
    for &tokens in token_counts {
        total_tokens += tokens;
        histogram[bucket_index(&edges, tokens)].count += 1;
    }

    let score_percentiles = if scored.is_empty() {
        Vec::new()
    } else {
        let mut values: Vec<f64> = scored.iter().map(|d| d.score).collect();
        values.sort_by(|a, b| a.total_cmp(b));
        let n = values.len() as u64;
        default_quantiles()
            .into_iter()
            .map(|q| {
                let rank = if q.is_one() { n - 1 } else { q.rank_floor(n) };
                PercentileEntry {
                    quantile: q,
                    value: values[rank as usize],
                }
            })
            .collect()
    };

    Ok(CorpusStats {
        documents_parsed: ingest.records_parsed,
        documents_kept: ingest.documents_kept,
        rejections: ingest.rejections,
        duplicate_pmids: ingest.duplicate_pmids,
        total_tokens,
        token_histogram: histogram,
        metric_coverage: coverage,
        score_percentiles,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    TextTable,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "text-table" | "text" => Ok(ReportFormat::TextTable),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

/// Render a report. JSON output has sorted keys and is byte-stable for
/// identical stats; the text table is for humans.
pub fn render_report(stats: &CorpusStats, format: ReportFormat) -> Result<Vec<u8>> {
    match format {
        ReportFormat::Json => {
            let value = serde_json::to_value(stats)?;
            let mut bytes = serde_json::to_vec_pretty(&value)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        ReportFormat::TextTable => Ok(render_text(stats).into_bytes()),
    }
}

fn render_text(stats: &CorpusStats) -> String {
    fn row(out: &mut String, label: &str, value: impl ToString) {
        let _ = writeln!(out, "  {:<28}{:>16}", label, value.to_string());
    }

    let mut out = String::new();
    out.push_str("corpus\n");
    row(&mut out, "documents parsed", stats.documents_parsed);
    row(&mut out, "documents kept", stats.documents_kept);
    row(&mut out, "rejected: not english", stats.rejections.not_english);
    row(
        &mut out,
        "rejected: no abstract text",
        stats.rejections.no_abstract_text,
    );
    row(&mut out, "rejected: no issn", stats.rejections.no_issn);
    row(&mut out, "duplicate pmids", stats.duplicate_pmids);
    out.push_str("tokens\n");
    row(&mut out, "total", stats.total_tokens);
    for bucket in &stats.token_histogram {
        let label = match bucket.max {
            Some(max) => format!("[{}, {})", bucket.min, max),
            None => format!("[{}, inf)", bucket.min),
        };
        let _ = writeln!(out, "    {label:<26}{:>16}", bucket.count);
    }
    out.push_str("metric coverage\n");
    row(&mut out, "matched", stats.metric_coverage.matched);
    row(&mut out, "unmatched", stats.metric_coverage.unmatched);
    out.push_str("score percentiles\n");
    for entry in &stats.score_percentiles {
        row(&mut out, &entry.quantile.to_string(), entry.value);
    }
    out
}
