//! `pmprune pack`: tokenize documents and pack them into train/validation
//! sequence files.
//!
//! Two phases, both streaming: documents are tokenized in ordered parallel
//! batches and packed into a combined temporary file; the holdout indices
//! are then drawn from the final sequence count and the combined file is
//! routed into `<prefix>.train.pksq` and `<prefix>.valid.pksq`.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use pmprune_core::ingest::Document;
use pmprune_core::pack::{validation_indices, PackOptions, Packer};
use pmprune_core::pksq::{PackedReader, PackedWriter};
use pmprune_core::rng::{derive_seed, streams};
use pmprune_core::select::SubsetManifest;
use pmprune_core::store::read_documents;
use pmprune_core::tokenize::tokenize_batch;
use pmprune_core::vocab::Vocabulary;
use pmprune_core::Quantile;

use super::require_exists;
use crate::error::{CliError, CliResult};

const TOKENIZE_BATCH: usize = 2048;

#[derive(Debug, Clone)]
pub struct PackOpts {
    pub documents: PathBuf,
    pub vocab: PathBuf,
    pub subset: Option<PathBuf>,
    pub output_prefix: PathBuf,
    pub seq_len: u32,
    pub validation_ratio: Quantile,
    pub pad_final: bool,
    pub raw_concat: bool,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PackStatsFile {
    pub seq_len: u32,
    pub vocab_digest: String,
    pub validation_ratio: String,
    pub documents: u64,
    pub document_tokens: u64,
    pub separators: u64,
    pub sequences_total: u64,
    pub train_sequences: u64,
    pub valid_sequences: u64,
    pub dropped_tokens: u64,
    pub pad_tokens: u64,
}

pub struct PackOutcome {
    pub train_path: PathBuf,
    pub valid_path: PathBuf,
    pub stats_path: PathBuf,
    pub stats: PackStatsFile,
}

fn with_suffix(prefix: &PathBuf, suffix: &str) -> PathBuf {
    let mut name = prefix
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "packed".to_string());
    name.push_str(suffix);
    prefix.with_file_name(name)
}

/// Scratch directory for the combined temporary file: `PMPRUNE_SCRATCH`
/// when set, else the output directory.
fn scratch_dir(prefix: &PathBuf) -> PathBuf {
    if let Ok(dir) = std::env::var("PMPRUNE_SCRATCH") {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    prefix
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from("."))
}

pub fn run(opts: &PackOpts) -> CliResult<PackOutcome> {
    require_exists(&opts.documents, "documents file")?;
    require_exists(&opts.vocab, "vocabulary file")?;
    let vocab = Vocabulary::from_bytes(&std::fs::read(&opts.vocab)?)?;
    let subset = match &opts.subset {
        Some(path) => {
            require_exists(path, "subset manifest")?;
            Some(SubsetManifest::read(path)?)
        }
        None => None,
    };

    let pack_options = PackOptions {
        seq_len: opts.seq_len,
        frame: !opts.raw_concat,
        pad_final: opts.pad_final,
    };
    let mut packer = Packer::new(pack_options, &vocab)?;

    let tmp_name = format!(
        "{}.tmp.pksq",
        opts.output_prefix
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "packed".into())
    );
    let tmp_path = scratch_dir(&opts.output_prefix).join(tmp_name);
    let mut combined = PackedWriter::create(&tmp_path, opts.seq_len, vocab.digest)?;
    let mut spans: Vec<(u64, u64)> = Vec::new();

    // Phase 1: stream documents in canonical order, tokenize in ordered
    // parallel batches, pack sequentially.
    let mut reader = read_documents(BufReader::new(File::open(&opts.documents)?));
    let mut last_pmid = 0u64;
    let mut batch: Vec<Document> = Vec::with_capacity(TOKENIZE_BATCH);
    let mut packed_documents = 0u64;
    let mut done = false;
    while !done {
        batch.clear();
        while batch.len() < TOKENIZE_BATCH {
            match reader.next() {
                Some(doc) => {
                    let doc = doc?;
                    if doc.pmid <= last_pmid {
                        return Err(CliError::data(format!(
                            "documents are not in ascending pmid order ({} after {last_pmid})",
                            doc.pmid
                        )));
                    }
                    last_pmid = doc.pmid;
                    if subset.as_ref().is_none_or(|m| m.contains(doc.pmid)) {
                        batch.push(doc);
                    }
                }
                None => {
                    done = true;
                    break;
                }
            }
        }
        let texts: Vec<&str> = batch.iter().map(|d| d.text.as_str()).collect();
        let token_lists = tokenize_batch(&texts, &vocab);
        for (doc, tokens) in batch.iter().zip(&token_lists) {
            packed_documents += 1;
            for seq in packer.push_document(doc.pmid, tokens) {
                spans.push(combined.write_sequence(&seq)?);
            }
        }
    }
    if let Some(manifest) = &subset {
        if packed_documents != manifest.pmid_count() {
            return Err(CliError::data(format!(
                "subset manifest lists {} pmids but {} were found in the documents file",
                manifest.pmid_count(),
                packed_documents
            )));
        }
    }
    let (final_seq, pack_stats) = packer.finish();
    if let Some(seq) = final_seq {
        spans.push(combined.write_sequence(&seq)?);
    }
    let combined_header = combined.finish()?;

    // Phase 2: route the combined file into train/valid by holdout index.
    let split_seed = derive_seed(opts.master_seed, streams::SPLIT);
    let valid_indices = validation_indices(combined_header.count, opts.validation_ratio, split_seed)?;
    let train_path = with_suffix(&opts.output_prefix, ".train.pksq");
    let valid_path = with_suffix(&opts.output_prefix, ".valid.pksq");
    let mut train = PackedWriter::create(&train_path, opts.seq_len, vocab.digest)?;
    let mut valid = PackedWriter::create(&valid_path, opts.seq_len, vocab.digest)?;
    let mut next_valid = valid_indices.iter().copied().peekable();
    for (i, ids) in PackedReader::open(&tmp_path)?.enumerate() {
        let ids = ids?;
        let span = spans[i];
        if next_valid.peek() == Some(&(i as u64)) {
            next_valid.next();
            valid.write_ids(&ids, span)?;
        } else {
            train.write_ids(&ids, span)?;
        }
    }
    let train_header = train.finish()?;
    let valid_header = valid.finish()?;
    std::fs::remove_file(&tmp_path)?;
    let index_tmp = pmprune_core::pksq::index_path(&tmp_path);
    let _ = std::fs::remove_file(index_tmp);

    let stats = PackStatsFile {
        seq_len: opts.seq_len,
        vocab_digest: pmprune_core::digest::format_digest(&vocab.digest),
        validation_ratio: opts.validation_ratio.to_string(),
        documents: pack_stats.documents,
        document_tokens: pack_stats.document_tokens,
        separators: pack_stats.separators,
        sequences_total: combined_header.count,
        train_sequences: train_header.count,
        valid_sequences: valid_header.count,
        dropped_tokens: pack_stats.dropped_tokens,
        pad_tokens: pack_stats.pad_tokens,
    };
    debug_assert_eq!(
        stats.train_sequences + stats.valid_sequences,
        stats.sequences_total
    );

    let stats_path = with_suffix(&opts.output_prefix, ".pack.stats.json");
    super::write_json_stable(&stats_path, &stats)?;

    Ok(PackOutcome {
        train_path,
        valid_path,
        stats_path,
        stats,
    })
}
