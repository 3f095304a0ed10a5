//! Journal impact metrics and per-document score assignment.
//!
//! The journal table is a semicolon-delimited export with one row per
//! journal; the `Issn` column may list several identifiers that all map to
//! the same metrics. Scores are either table lookups (h-index, SJR) or a
//! seeded random assignment that depends only on `(seed, pmid)`.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::ingest::Document;
use crate::issn::{normalize_issn, Issn};
use crate::rng;
use crate::{Error, Result};

/// Per-journal impact values keyed by normalized ISSN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalMetrics {
    pub issn: Issn,
    pub h_index: u32,
    pub sjr: f64,
}

/// The score function ξ applied to documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MetricKind {
    HIndex,
    Sjr,
    Random { seed: u64 },
}

impl MetricKind {
    pub fn needs_table(&self) -> bool {
        !matches!(self, MetricKind::Random { .. })
    }

    /// Flag-style name, without the random seed.
    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::HIndex => "h-index",
            MetricKind::Sjr => "sjr",
            MetricKind::Random { .. } => "random",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricKind::Random { seed } => write!(f, "random(seed={seed})"),
            other => f.write_str(other.name()),
        }
    }
}

/// A document reduced to what selection needs. `token_count` starts at zero
/// and is filled in once the document has been tokenized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredDocument {
    pub pmid: u64,
    pub score: f64,
    #[serde(default)]
    pub token_count: u64,
}

/// How many documents found their journal in the table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    pub matched: u64,
    pub unmatched: u64,
}

/// Counts of journal-table rows that could not be used.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableStats {
    /// Rows skipped because no listed ISSN normalized.
    pub rows_skipped: u64,
    /// Individual ISSN entries that failed to normalize.
    pub issns_skipped: u64,
    /// Exact duplicate (ISSN, metrics) re-definitions that were tolerated.
    pub duplicates_ignored: u64,
}

/// Lookup table from normalized ISSN to journal metrics.
#[derive(Debug, Clone, Default)]
pub struct JournalTable {
    entries: HashMap<Issn, JournalMetrics>,
    pub stats: TableStats,
}

impl JournalTable {
    /// Load a semicolon-delimited table. Requires a header row naming the
    /// `Issn`, `H index`, and `SJR` columns; every other column is ignored.
    /// `SJR` uses a decimal comma and may be empty (treated as 0).
    ///
    /// A normalized ISSN that re-appears with conflicting values is a hard
    /// error naming both rows.
    pub fn load<R: Read>(reader: R) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new()
            .delimiter(b';')
            .flexible(true)
            .from_reader(reader);

        let headers = csv
            .headers()
            .map_err(|e| Error::Table(format!("cannot read header row: {e}")))?
            .clone();
        let col = |name: &str| -> Result<usize> {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::Table(format!("missing required column {name:?}")))
        };
        let issn_col = col("Issn")?;
        let h_col = col("H index")?;
        let sjr_col = col("SJR")?;

        let mut table = JournalTable::default();
        let mut first_rows: HashMap<Issn, u64> = HashMap::new();
        for (idx, row) in csv.records().enumerate() {
            // Row numbers are 1-based and count the header.
            let row_no = idx as u64 + 2;
            let row = row.map_err(|e| Error::TableRow {
                row: row_no,
                message: e.to_string(),
            })?;
            let field = |i: usize| row.get(i).unwrap_or("").trim();

            let h_index: u32 = field(h_col).parse().map_err(|_| Error::TableRow {
                row: row_no,
                message: format!("invalid H index {:?}", field(h_col)),
            })?;
            let sjr = parse_decimal_comma(field(sjr_col)).ok_or_else(|| Error::TableRow {
                row: row_no,
                message: format!("invalid SJR {:?}", field(sjr_col)),
            })?;

            let mut any = false;
            for raw in field(issn_col).split(',') {
                let raw = raw.trim();
                if raw.is_empty() {
                    continue;
                }
                let Some(issn) = normalize_issn(raw) else {
                    table.stats.issns_skipped += 1;
                    continue;
                };
                any = true;
                match table.entries.get(&issn) {
                    Some(existing) if existing.h_index == h_index && existing.sjr == sjr => {
                        table.stats.duplicates_ignored += 1;
                    }
                    Some(_) => {
                        return Err(Error::Table(format!(
                            "duplicate metrics for ISSN {issn}: row {row_no} conflicts with row {}",
                            first_rows[&issn]
                        )));
                    }
                    None => {
                        first_rows.insert(issn, row_no);
                        table.entries.insert(
                            issn,
                            JournalMetrics {
                                issn,
                                h_index,
                                sjr,
                            },
                        );
                    }
                }
            }
            if !any {
                table.stats.rows_skipped += 1;
            }
        }
        Ok(table)
    }

    pub fn get(&self, issn: &Issn) -> Option<&JournalMetrics> {
        self.entries.get(issn)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Parse a non-negative decimal that may use a comma as the decimal
/// separator. Empty input is 0.
fn parse_decimal_comma(s: &str) -> Option<f64> {
    if s.is_empty() {
        return Some(0.0);
    }
    let normalized = s.replace(',', ".");
    let value: f64 = normalized.parse().ok()?;
    (value.is_finite() && value >= 0.0).then_some(value)
}

/// Score one document. Returns the score and whether the journal was found
/// in the table (random scoring counts as matched).
pub fn document_score(doc: &Document, metric: &MetricKind, table: &JournalTable) -> (f64, bool) {
    match metric {
        MetricKind::HIndex => match table.get(&doc.issn) {
            Some(m) => (f64::from(m.h_index), true),
            None => (0.0, false),
        },
        MetricKind::Sjr => match table.get(&doc.issn) {
            Some(m) => (m.sjr, true),
            None => (0.0, false),
        },
        MetricKind::Random { seed } => (rng::unit_from(*seed, doc.pmid), true),
    }
}

/// Assign a score to every document, in input order.
///
/// Unmatched journals score 0 (the documents are kept); random scores are a
/// pure function of `(seed, pmid)`.
pub fn assign_scores<'a, I>(
    documents: I,
    metric: MetricKind,
    table: &'a JournalTable,
) -> impl Iterator<Item = ScoredDocument> + 'a
where
    I: IntoIterator<Item = &'a Document>,
    I::IntoIter: 'a,
{
    documents.into_iter().map(move |doc| {
        let (score, _) = document_score(doc, &metric, table);
        ScoredDocument {
            pmid: doc.pmid,
            score,
            token_count: 0,
        }
    })
}

/// [`assign_scores`] plus coverage accounting and the optional
/// drop-unscored policy.
pub fn score_documents(
    documents: &[Document],
    metric: MetricKind,
    table: Option<&JournalTable>,
    drop_unscored: bool,
) -> Result<(Vec<ScoredDocument>, Coverage)> {
    let empty = JournalTable::default();
    let table = match table {
        Some(t) => t,
        None if metric.needs_table() => {
            return Err(Error::MissingTable {
                metric: metric.name().to_string(),
            })
        }
        None => &empty,
    };
    let mut coverage = Coverage::default();
    let mut scored = Vec::with_capacity(documents.len());
    for doc in documents {
        let (score, matched) = document_score(doc, &metric, table);
        if matched {
            coverage.matched += 1;
        } else {
            coverage.unmatched += 1;
            if drop_unscored {
                continue;
            }
        }
        scored.push(ScoredDocument {
            pmid: doc.pmid,
            score,
            token_count: 0,
        });
    }
    Ok((scored, coverage))
}
