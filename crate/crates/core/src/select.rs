//! Percentile-window subset selection.
//!
//! Documents are totally ordered by (score ascending, pmid ascending) and
//! ranked 0..n−1. A criterion resolves to an exact quantile window
//! [lower, upper); rank r is selected iff ⌊lower·n⌋ ≤ r < ⌊upper·n⌋, with
//! the window closed at the top when upper = 1. Rank windows make subset
//! sizes exact and deterministic even when large score clusters tie (SJR
//! tables zero-score a quarter of the corpus); on tie-free data they agree
//! with plain value thresholds.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::metrics::{MetricKind, ScoredDocument};
use crate::quantile::Quantile;
use crate::{Error, Result};

/// Which end of the score distribution to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Top,
    Mid,
    /// Lowest-scoring fraction. Provided for completeness; the standard
    /// configurations use only `Top` and `Mid`.
    Bottom,
}

impl Part {
    pub fn as_str(&self) -> &'static str {
        match self {
            Part::Top => "top",
            Part::Mid => "mid",
            Part::Bottom => "bottom",
        }
    }
}

impl FromStr for Part {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "top" => Ok(Part::Top),
            "mid" => Ok(Part::Mid),
            "bottom" => Ok(Part::Bottom),
            other => Err(Error::InvalidFraction(format!(
                "unknown part {other:?} (expected top, mid, or bottom)"
            ))),
        }
    }
}

/// A selection criterion: the part of the distribution and the fraction of
/// documents to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Criterion {
    pub part: Part,
    pub fraction: Quantile,
}

impl Criterion {
    /// `fraction` must lie in (0, 1].
    pub fn new(part: Part, fraction: Quantile) -> Result<Self> {
        if fraction.is_zero() {
            return Err(Error::InvalidFraction(fraction.to_string()));
        }
        Ok(Criterion { part, fraction })
    }
}

/// Resolve a criterion to its quantile window.
///
/// Mid f → ((1−f)/2, (1+f)/2); Top f → (1−f, 1); Bottom f → (0, f).
/// All arithmetic is exact.
pub fn bounds_for(criterion: &Criterion) -> (Quantile, Quantile) {
    let f = criterion.fraction;
    match criterion.part {
        Part::Top => (f.complement(), Quantile::ONE),
        Part::Mid => {
            let lower = f.complement().halve();
            (lower, lower.saturating_add(f))
        }
        Part::Bottom => (Quantile::ZERO, f),
    }
}

/// A fully resolved selection configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetSpec {
    pub metric: MetricKind,
    pub criterion: Criterion,
    pub lower_quantile: Quantile,
    pub upper_quantile: Quantile,
}

impl SubsetSpec {
    pub fn new(metric: MetricKind, criterion: Criterion) -> Self {
        let (lower_quantile, upper_quantile) = bounds_for(&criterion);
        debug_assert_eq!(
            upper_quantile.checked_sub(lower_quantile),
            Some(criterion.fraction)
        );
        SubsetSpec {
            metric,
            criterion,
            lower_quantile,
            upper_quantile,
        }
    }
}

/// The materialized subset: sorted pmids plus enough context to reproduce
/// and verify the selection.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetManifest {
    pub spec: SubsetSpec,
    /// Realized score values at the window bounds (c₀ξ, c₁ξ).
    pub realized_value_bounds: (f64, f64),
    pub source_digest: String,
    pub total_count: u64,
    /// Selected pmids, strictly increasing.
    pub pmids: Vec<u64>,
}

impl SubsetManifest {
    pub fn pmid_count(&self) -> u64 {
        self.pmids.len() as u64
    }

    pub fn contains(&self, pmid: u64) -> bool {
        self.pmids.binary_search(&pmid).is_ok()
    }
}

fn sorted_pairs(scored: &[ScoredDocument]) -> Result<Vec<(f64, u64)>> {
    for doc in scored {
        if !doc.score.is_finite() {
            return Err(Error::Stats(format!(
                "non-finite score for pmid {}",
                doc.pmid
            )));
        }
    }
    let mut pairs: Vec<(f64, u64)> = scored.iter().map(|d| (d.score, d.pmid)).collect();
    pairs.par_sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(pairs)
}

fn value_at(pairs: &[(f64, u64)], q: Quantile) -> f64 {
    let n = pairs.len() as u64;
    let rank = if q.is_one() { n - 1 } else { q.rank_floor(n) };
    pairs[rank.min(n - 1) as usize].0
}

/// Materialize the subset for `spec` over `scored`.
///
/// Pure in the scored multiset: input order and thread count do not affect
/// the result. Errors on empty input and on windows that select nothing.
pub fn select(
    scored: &[ScoredDocument],
    spec: &SubsetSpec,
    source_digest: &str,
) -> Result<SubsetManifest> {
    if scored.is_empty() {
        return Err(Error::EmptyInput("scored documents"));
    }
    let pairs = sorted_pairs(scored)?;
    let n = pairs.len() as u64;
    let lo = spec.lower_quantile.rank_floor(n);
    let hi = if spec.upper_quantile.is_one() {
        n
    } else {
        spec.upper_quantile.rank_floor(n)
    };
    if hi <= lo {
        return Err(Error::EmptySelection {
            lower: spec.lower_quantile.to_string(),
            upper: spec.upper_quantile.to_string(),
            total: n,
        });
    }
    let realized = (
        value_at(&pairs, spec.lower_quantile),
        value_at(&pairs, spec.upper_quantile),
    );
    let mut pmids: Vec<u64> = pairs[lo as usize..hi as usize]
        .iter()
        .map(|&(_, pmid)| pmid)
        .collect();
    pmids.par_sort_unstable();
    Ok(SubsetManifest {
        spec: spec.clone(),
        realized_value_bounds: realized,
        source_digest: source_digest.to_string(),
        total_count: n,
        pmids,
    })
}

/// Score value at quantile `q` under the (score, pmid) total order: the
/// value at rank ⌊q·n⌋, or rank n−1 when q = 1.
pub fn quantile_value(scored: &[ScoredDocument], q: Quantile) -> Result<f64> {
    if scored.is_empty() {
        return Err(Error::EmptyInput("scored documents"));
    }
    let pairs = sorted_pairs(scored)?;
    Ok(value_at(&pairs, q))
}

// ---------------------------------------------------------------------------
// Manifest file format
// ---------------------------------------------------------------------------

/// On-disk JSON shape. Pmids above `inline_limit` move to a sibling binary
/// file of little-endian u64, sorted ascending.
#[derive(Serialize, Deserialize)]
struct ManifestDoc {
    spec: SubsetSpec,
    realized_value_bounds: (f64, f64),
    pmid_count: u64,
    total_count: u64,
    source_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pmids: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pmids_file: Option<String>,
}

pub const DEFAULT_INLINE_PMID_LIMIT: usize = 65_536;

fn sidecar_name(path: &Path) -> String {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "subset".to_string());
    format!("{stem}.pmids.bin")
}

impl SubsetManifest {
    /// Write the manifest as JSON; pmid lists longer than `inline_limit`
    /// are stored in a sibling `<stem>.pmids.bin` file.
    pub fn write(&self, path: &Path, inline_limit: usize) -> Result<()> {
        let mut doc = ManifestDoc {
            spec: self.spec.clone(),
            realized_value_bounds: self.realized_value_bounds,
            pmid_count: self.pmid_count(),
            total_count: self.total_count,
            source_digest: self.source_digest.clone(),
            pmids: None,
            pmids_file: None,
        };
        if self.pmids.len() > inline_limit {
            let name = sidecar_name(path);
            let sidecar = path.with_file_name(&name);
            let mut w = std::io::BufWriter::new(fs::File::create(&sidecar)?);
            for pmid in &self.pmids {
                w.write_all(&pmid.to_le_bytes())?;
            }
            w.flush()?;
            doc.pmids_file = Some(name);
        } else {
            doc.pmids = Some(self.pmids.clone());
        }
        let value = serde_json::to_value(&doc)?;
        let mut bytes = serde_json::to_vec_pretty(&value)?;
        bytes.push(b'\n');
        fs::write(path, bytes)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<SubsetManifest> {
        let doc: ManifestDoc = serde_json::from_slice(&fs::read(path)?)?;
        let pmids = match (doc.pmids, doc.pmids_file) {
            (Some(pmids), _) => pmids,
            (None, Some(name)) => {
                let sidecar = path.with_file_name(&name);
                let bytes = fs::read(&sidecar)?;
                if bytes.len() % 8 != 0 {
                    return Err(Error::PackFormat(format!(
                        "pmid sidecar {} has a truncated entry",
                        sidecar.display()
                    )));
                }
                bytes
                    .chunks_exact(8)
                    .map(|c| u64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                    .collect()
            }
            (None, None) => Vec::new(),
        };
        if pmids.len() as u64 != doc.pmid_count {
            return Err(Error::PackFormat(format!(
                "manifest {} claims {} pmids but stores {}",
                path.display(),
                doc.pmid_count,
                pmids.len()
            )));
        }
        Ok(SubsetManifest {
            spec: doc.spec,
            realized_value_bounds: doc.realized_value_bounds,
            source_digest: doc.source_digest,
            total_count: doc.total_count,
            pmids,
        })
    }
}
