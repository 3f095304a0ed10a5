//! Streaming ingest of PubMed-baseline-style XML archives.
//!
//! [`parse_records`] yields one [`RawRecord`] per `PubmedArticle` element
//! with memory bounded by a single record; [`filter_record`] applies the
//! three-stage filter cascade (language, abstract availability, journal
//! identifier) and produces [`Document`] values for the kept records.

mod xml;

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use flate2::bufread::MultiGzDecoder;
use serde::{Deserialize, Serialize};

use crate::issn::{normalize_issn, Issn};
use crate::Result;

pub use xml::RecordReader;

/// One article record as read from the XML, before filtering.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawRecord {
    pub pmid: u64,
    pub title: Option<String>,
    /// Abstract text segments in document order (structured abstracts have
    /// several; labels are not retained).
    pub abstract_segments: Vec<String>,
    pub language_codes: Vec<String>,
    /// Raw ISSN strings in priority order: print, electronic, linking.
    pub issn_candidates: Vec<String>,
    pub journal_title: Option<String>,
}

/// A filtered abstract record flowing through the pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub pmid: u64,
    /// Title plus concatenated abstract segments, whitespace-normalized.
    pub text: String,
    pub issn: Issn,
}

/// Why a record was rejected. Reasons are checked in this order and the
/// first failure wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    NotEnglish,
    NoAbstractText,
    NoIssn,
}

/// Verdict of the filter cascade; kept records carry their [`Document`].
#[derive(Debug, Clone, PartialEq)]
pub enum FilterOutcome {
    Kept(Document),
    Rejected(RejectReason),
}

impl FilterOutcome {
    pub fn is_kept(&self) -> bool {
        matches!(self, FilterOutcome::Kept(_))
    }

    pub fn reason(&self) -> Option<RejectReason> {
        match self {
            FilterOutcome::Kept(_) => None,
            FilterOutcome::Rejected(reason) => Some(*reason),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FilterOptions {
    /// Prepend the article title to the abstract text (separated by one
    /// space). On by default.
    pub include_title: bool,
}

impl Default for FilterOptions {
    fn default() -> Self {
        FilterOptions {
            include_title: true,
        }
    }
}

/// Collapse runs of whitespace to single spaces and trim the ends. Keeps
/// token counts stable across XML formatting variants.
pub(crate) fn normalize_ws(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Stream records out of a well-formed XML byte stream.
///
/// Yields records in file order; memory use is bounded by the size of a
/// single record. Malformed XML surfaces as an `Err` item carrying the byte
/// offset, after every complete prior record has been yielded.
pub fn parse_records<R: BufRead>(reader: R) -> RecordReader<R> {
    RecordReader::new(reader)
}

/// Open an archive by path; `.gz` files are decompressed transparently.
pub fn open_archive(path: &Path) -> Result<RecordReader<Box<dyn BufRead + Send>>> {
    let file = File::open(path)?;
    let reader: Box<dyn BufRead + Send> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(BufReader::new(MultiGzDecoder::new(BufReader::new(file))))
    } else {
        Box::new(BufReader::new(file))
    };
    Ok(parse_records(reader))
}

/// Apply the filter cascade to one record.
///
/// A record is kept iff it is English, its concatenated abstract text is
/// non-empty, and at least one ISSN candidate normalizes. Checks run in the
/// order NotEnglish → NoAbstractText → NoIssn; the first failure is the
/// recorded reason. Kept records yield a [`Document`] whose `issn` is the
/// first candidate that normalizes.
pub fn filter_record(record: &RawRecord, options: &FilterOptions) -> FilterOutcome {
    if !record.language_codes.iter().any(|code| code == "eng") {
        return FilterOutcome::Rejected(RejectReason::NotEnglish);
    }

    let abstract_text = normalize_ws(&record.abstract_segments.join(" "));
    if abstract_text.is_empty() {
        return FilterOutcome::Rejected(RejectReason::NoAbstractText);
    }

    let Some(issn) = record
        .issn_candidates
        .iter()
        .find_map(|raw| normalize_issn(raw))
    else {
        return FilterOutcome::Rejected(RejectReason::NoIssn);
    };

    let text = match record.title.as_deref().map(normalize_ws) {
        Some(title) if options.include_title && !title.is_empty() => {
            format!("{title} {abstract_text}")
        }
        _ => abstract_text,
    };

    FilterOutcome::Kept(Document {
        pmid: record.pmid,
        text,
        issn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(langs: &[&str], segments: &[&str], issns: &[&str]) -> RawRecord {
        RawRecord {
            pmid: 1,
            title: Some("A title".to_string()),
            abstract_segments: segments.iter().map(|s| s.to_string()).collect(),
            language_codes: langs.iter().map(|s| s.to_string()).collect(),
            issn_candidates: issns.iter().map(|s| s.to_string()).collect(),
            journal_title: None,
        }
    }

    #[test]
    fn rejects_non_english() {
        let outcome = filter_record(
            &record(&["fre"], &["Résumé."], &["0028-0836"]),
            &FilterOptions::default(),
        );
        assert_eq!(outcome.reason(), Some(RejectReason::NotEnglish));
    }

    #[test]
    fn rejects_missing_abstract() {
        let outcome = filter_record(
            &record(&["eng"], &[], &["0028-0836"]),
            &FilterOptions::default(),
        );
        assert_eq!(outcome.reason(), Some(RejectReason::NoAbstractText));
    }

    #[test]
    fn whitespace_only_abstract_counts_as_missing() {
        let outcome = filter_record(
            &record(&["eng"], &["  \t\n  ", " "], &["0028-0836"]),
            &FilterOptions::default(),
        );
        assert_eq!(outcome.reason(), Some(RejectReason::NoAbstractText));
    }

    #[test]
    fn rejects_missing_issn() {
        let outcome = filter_record(
            &record(&["eng"], &["Some text."], &[]),
            &FilterOptions::default(),
        );
        assert_eq!(outcome.reason(), Some(RejectReason::NoIssn));
        let outcome = filter_record(
            &record(&["eng"], &["Some text."], &["not-an-issn"]),
            &FilterOptions::default(),
        );
        assert_eq!(outcome.reason(), Some(RejectReason::NoIssn));
    }

    #[test]
    fn keeps_and_normalizes() {
        let outcome = filter_record(
            &record(&["eng"], &["Some text."], &["0028-0836"]),
            &FilterOptions::default(),
        );
        let FilterOutcome::Kept(doc) = outcome else {
            panic!("expected kept");
        };
        assert_eq!(doc.issn.as_str(), "00280836");
        assert_eq!(doc.text, "A title Some text.");
    }

    #[test]
    fn first_failure_wins() {
        // Fails every predicate; the recorded reason is the first check.
        let outcome = filter_record(&record(&["fre"], &[], &[]), &FilterOptions::default());
        assert_eq!(outcome.reason(), Some(RejectReason::NotEnglish));
        // English but missing both abstract and ISSN: abstract is checked first.
        let outcome = filter_record(&record(&["eng"], &[], &[]), &FilterOptions::default());
        assert_eq!(outcome.reason(), Some(RejectReason::NoAbstractText));
    }

    #[test]
    fn first_normalizable_issn_wins() {
        let outcome = filter_record(
            &record(&["eng"], &["Text."], &["bogus", "1542-4863", "0028-0836"]),
            &FilterOptions::default(),
        );
        let FilterOutcome::Kept(doc) = outcome else {
            panic!("expected kept");
        };
        assert_eq!(doc.issn.as_str(), "15424863");
    }

    #[test]
    fn title_flag_and_structured_abstract() {
        let mut rec = record(
            &["eng", "fre"],
            &["BACKGROUND  text one.", "RESULTS\ttext two."],
            &["0028-0836"],
        );
        rec.title = Some("  Spaced   title ".to_string());
        let kept = |opts: &FilterOptions| match filter_record(&rec, opts) {
            FilterOutcome::Kept(doc) => doc,
            other => panic!("expected kept, got {other:?}"),
        };
        let with_title = kept(&FilterOptions {
            include_title: true,
        });
        assert_eq!(
            with_title.text,
            "Spaced title BACKGROUND text one. RESULTS text two."
        );
        let without_title = kept(&FilterOptions {
            include_title: false,
        });
        assert_eq!(without_title.text, "BACKGROUND text one. RESULTS text two.");
    }

    #[test]
    fn missing_title_is_fine() {
        let mut rec = record(&["eng"], &["Text."], &["0028-0836"]);
        rec.title = None;
        let FilterOutcome::Kept(doc) = filter_record(&rec, &FilterOptions::default()) else {
            panic!("expected kept");
        };
        assert_eq!(doc.text, "Text.");
    }

    #[test]
    fn kept_iff_all_predicates_hold() {
        // Exercise all 8 predicate combinations.
        for english in [false, true] {
            for has_abstract in [false, true] {
                for has_issn in [false, true] {
                    let rec = record(
                        if english { &["eng"] } else { &["deu"] },
                        if has_abstract { &["Body."] } else { &[] },
                        if has_issn { &["0028-0836"] } else { &[] },
                    );
                    let outcome = filter_record(&rec, &FilterOptions::default());
                    assert_eq!(
                        outcome.is_kept(),
                        english && has_abstract && has_issn,
                        "english={english} abstract={has_abstract} issn={has_issn}"
                    );
                }
            }
        }
    }
}
