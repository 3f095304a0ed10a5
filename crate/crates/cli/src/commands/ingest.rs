//! `pmprune ingest`: XML archives → filtered, pmid-sorted documents.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use rayon::prelude::*;

use pmprune_core::ingest::{filter_record, open_archive, FilterOptions, FilterOutcome};
use pmprune_core::report::{IngestStats, RejectionCounts};
use pmprune_core::store::write_documents;
use pmprune_core::RejectReason;

use super::{require_exists, stats_path_for};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct IngestOpts {
    pub inputs: Vec<PathBuf>,
    pub output: PathBuf,
    pub include_title: bool,
}

pub struct IngestOutcome {
    pub stats: IngestStats,
    pub stats_path: PathBuf,
}

pub fn run(opts: &IngestOpts) -> CliResult<IngestOutcome> {
    for input in &opts.inputs {
        require_exists(input, "input file")?;
    }
    let filter_opts = FilterOptions {
        include_title: opts.include_title,
    };

    // File-level parallelism; each worker streams one archive.
    type Entry = (u64, (u32, u64), FilterOutcome); // (pmid, arrival order, verdict)
    let per_file: Vec<CliResult<Vec<Entry>>> = opts
        .inputs
        .par_iter()
        .enumerate()
        .map(|(file_idx, path)| {
            let reader = open_archive(path)
                .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
            let mut entries = Vec::new();
            for (record_idx, record) in reader.enumerate() {
                let record =
                    record.map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
                let outcome = filter_record(&record, &filter_opts);
                entries.push((record.pmid, (file_idx as u32, record_idx as u64), outcome));
            }
            Ok(entries)
        })
        .collect();

    let mut entries: Vec<Entry> = Vec::new();
    for result in per_file {
        entries.extend(result?);
    }
    let records_read = entries.len() as u64;

    // Last record wins for duplicate pmids: sort by (pmid, arrival) and keep
    // the final entry of each pmid run. Filtering already happened, so a
    // later rejected record correctly knocks out an earlier kept one.
    entries.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut survivors: Vec<Entry> = Vec::with_capacity(entries.len());
    for entry in entries {
        match survivors.last() {
            Some(last) if last.0 == entry.0 => {
                *survivors.last_mut().expect("non-empty") = entry;
            }
            _ => survivors.push(entry),
        }
    }
    let duplicate_pmids = records_read - survivors.len() as u64;

    let mut rejections = RejectionCounts::default();
    let mut documents = Vec::new();
    for (_, _, outcome) in survivors {
        match outcome {
            FilterOutcome::Kept(doc) => documents.push(doc),
            FilterOutcome::Rejected(reason) => match reason {
                RejectReason::NotEnglish => rejections.not_english += 1,
                RejectReason::NoAbstractText => rejections.no_abstract_text += 1,
                RejectReason::NoIssn => rejections.no_issn += 1,
            },
        }
    }

    let stats = IngestStats {
        records_parsed: documents.len() as u64 + rejections.total(),
        documents_kept: documents.len() as u64,
        rejections,
        duplicate_pmids,
    };

    let mut out = BufWriter::new(File::create(&opts.output)?);
    write_documents(&mut out, &documents)?;
    drop(out);

    let stats_path = stats_path_for(&opts.output);
    super::write_json_stable(&stats_path, &stats)?;

    Ok(IngestOutcome { stats, stats_path })
}
