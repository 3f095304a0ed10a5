//! Deterministic construction of quality-pruned pre-training corpora from
//! PubMed-style abstract databases.
//!
//! The pipeline stages, in order:
//!
//! 1. [`ingest`] — stream abstract records out of baseline XML archives and
//!    filter them (language, abstract availability, journal identifier).
//! 2. [`metrics`] — join journal impact metrics (h-index, SJR) onto the
//!    filtered documents, or assign seeded random scores.
//! 3. [`select`] — materialize percentile-window subsets of the scored
//!    corpus with deterministic tie-breaking.
//! 4. [`tokenize`] / [`pack`] — WordPiece-tokenize documents and pack them
//!    into fixed-length training sequences with a validation holdout.
//! 5. [`plan`] — compute the shared step budget, epoch schedule, and LR
//!    schedule for a subset run.
//! 6. [`report`] — corpus statistics: token totals, rejection counts,
//!    score percentiles.
//!
//! Every stage is a pure function of its inputs and explicit seeds; output
//! bytes are identical for any worker count.

pub mod digest;
mod error;
pub mod ingest;
pub mod issn;
pub mod mask;
pub mod metrics;
pub mod pack;
pub mod pksq;
pub mod plan;
pub mod quantile;
pub mod report;
pub mod rng;
pub mod select;
pub mod store;
pub mod synth;
pub mod tokenize;
pub mod vocab;

pub use error::{Error, Result};
pub use ingest::{Document, FilterOptions, FilterOutcome, RawRecord, RejectReason};
pub use issn::{normalize_issn, Issn};
pub use mask::{mask_tokens, MaskLabel, MaskedSequence};
pub use metrics::{JournalMetrics, JournalTable, MetricKind, ScoredDocument};
pub use pack::{split_validation, PackOptions, PackStats, PackedSequence, Packer};
pub use plan::{lr_at, plan, TrainPlan};
pub use quantile::Quantile;
pub use report::{corpus_stats, render_report, CorpusStats, ReportFormat};
pub use select::{bounds_for, quantile_value, select, Criterion, Part, SubsetManifest, SubsetSpec};
pub use vocab::Vocabulary;
