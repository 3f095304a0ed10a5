//! `pmprune select`: materialize one percentile-window subset.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use pmprune_core::digest::file_digest_string;
use pmprune_core::metrics::{MetricKind, ScoredDocument};
use pmprune_core::select::{select, Criterion, Part, SubsetSpec, DEFAULT_INLINE_PMID_LIMIT};
use pmprune_core::store::read_scored;
use pmprune_core::Quantile;

use super::require_exists;
use crate::error::CliResult;

#[derive(Debug, Clone)]
pub struct SelectOpts {
    pub scored: PathBuf,
    pub metric: MetricKind,
    pub part: Part,
    pub fraction: Quantile,
    pub output: PathBuf,
    pub inline_pmid_limit: usize,
}

impl SelectOpts {
    pub fn default_inline_limit() -> usize {
        DEFAULT_INLINE_PMID_LIMIT
    }
}

pub struct SelectOutcome {
    pub selected: u64,
    pub total: u64,
    pub lower: Quantile,
    pub upper: Quantile,
}

pub fn run(opts: &SelectOpts) -> CliResult<SelectOutcome> {
    require_exists(&opts.scored, "scored file")?;
    let scored: Vec<ScoredDocument> = read_scored(BufReader::new(File::open(&opts.scored)?))
        .collect::<pmprune_core::Result<_>>()?;
    let source_digest = file_digest_string(&opts.scored)?;

    let criterion = Criterion::new(opts.part, opts.fraction)?;
    let spec = SubsetSpec::new(opts.metric, criterion);
    let manifest = select(&scored, &spec, &source_digest)?;
    manifest.write(&opts.output, opts.inline_pmid_limit)?;

    Ok(SelectOutcome {
        selected: manifest.pmid_count(),
        total: manifest.total_count,
        lower: spec.lower_quantile,
        upper: spec.upper_quantile,
    })
}
